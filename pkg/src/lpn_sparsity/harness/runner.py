"""Config-driven construction of approximators, tables and learners."""

from __future__ import annotations

import os
import time

from ..approx import ApproximatorHandle, approximator_from_config
from ..budget import LearnerBudget
from ..errors import BudgetExceeded, EmptyCandidateSet, PreconditionFailed
from ..field import make_field
from ..full_learner import RUN_FAILURES, big_n, eta_sweep, learn_parity_full, learn_sparse_pipeline
from ..linmodel import LinearFn
from ..oracle import ExampleOracle, planted_oracle
from ..psi import PsiTable, build_psi_table
from ..seeding import derive_seed
from .config import ExperimentConfig
from .instances import planted_target

FAILURES = RUN_FAILURES + (EmptyCandidateSet,)


def learner_dim(cfg: ExperimentConfig) -> int:
    """Dimension the approximator and table work at (N for the full pipeline)."""
    return cfg.n if cfg.method == "sparse" else big_n(cfg.gamma_spec(), cfg.n)


def gap_start(cfg: ExperimentConfig) -> int | None:
    """Gap-search start m: explicit, else the configured sparsity, else the log2 default."""
    if cfg.m is not None:
        return cfg.m
    return cfg.d if cfg.d >= 1 else None


def make_approximator(cfg: ExperimentConfig) -> ApproximatorHandle:
    return approximator_from_config(cfg.approximator, cfg.gamma_spec(), make_field(cfg.q),
                                    learner_dim(cfg), cfg.eta_bound, mode=cfg.approx_mode,
                                    delta=cfg.approx_delta, clamp=cfg.clamp)


def make_table(cfg: ExperimentConfig, A: ApproximatorHandle) -> PsiTable:
    if cfg.psi_table and os.path.exists(cfg.psi_table):
        with open(cfg.psi_table) as fh:
            return PsiTable.from_json(fh.read())
    dim = learner_dim(cfg)
    h = cfg.h if cfg.h is not None else 1 / (16 * dim)
    return build_psi_table(A, cfg.gamma_spec(), make_field(cfg.q), dim, cfg.eta_bound, h,
                           cfg.delta / 4, derive_seed(cfg.seed, "table"), fast=cfg.fast)


def learn(cfg: ExperimentConfig, oracle: ExampleOracle, A: ApproximatorHandle | None = None,
          table: PsiTable | None = None, pool: list | None = None) -> LinearFn:
    A = make_approximator(cfg) if A is None else A
    table = make_table(cfg, A) if table is None else table
    ctx, gamma = make_field(cfg.q), cfg.gamma_spec()
    seed = derive_seed(cfg.seed, cfg.seed_label, "learn")
    if cfg.method == "sparse":
        return learn_sparse_pipeline(A, gamma, ctx, cfg.n, oracle, cfg.delta, seed, m=gap_start(cfg),
                                     k=cfg.k, relevance=cfg.relevance,
                                     coefficients=cfg.coefficients, fast=cfg.fast, table=table,
                                     sweep=cfg.sweep, grid_steps=cfg.grid_steps,
                                     distinguisher_trials=cfg.distinguisher_trials, pool=pool)

    def full(orc, s, pool=None):
        return learn_parity_full(A, gamma, ctx, cfg.n, orc, cfg.delta, s,
                                 relevance=cfg.relevance, coefficients=cfg.coefficients,
                                 fast=cfg.fast, table=table, reps=cfg.boost_reps, pool=pool)

    if cfg.sweep:
        return eta_sweep(full, oracle, cfg.eta_bound, ctx, cfg.grid_steps, cfg.delta, seed, pool)
    return full(oracle, seed, pool)


def budget_for(cfg: ExperimentConfig) -> LearnerBudget:
    return LearnerBudget(cfg.delta, cfg.boost_reps, cfg.example_cap, cfg.wall_cap_s)


def run_learn(cfg: ExperimentConfig, oracle: ExampleOracle, truth: LinearFn | None = None,
              pool: list | None = None) -> dict:
    """Learn under the config's budget; the record carries success only when truth is known."""
    t0 = time.perf_counter()
    rec = {"config_hash": cfg.config_hash(), "coefficients": None}
    try:
        # the table is offline simulation: only the wall-clock cap applies to it
        with LearnerBudget(cfg.delta, wall_cap_s=cfg.wall_cap_s).active():
            A = make_approximator(cfg)
            table = make_table(cfg, A)
        with budget_for(cfg).active():
            h = learn(cfg, oracle, A, table, pool=pool)
        rec["coefficients"] = h.coeffs.tolist()
    except BudgetExceeded as e:
        rec["partial"] = True
        rec["error"] = f"BudgetExceeded: {e}"
    except FAILURES + (PreconditionFailed,) as e:
        rec["error"] = f"{type(e).__name__}: {e}"
    rec["examples_used"] = oracle.examples_used
    rec["wall_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    if truth is not None:
        rec["success"] = (rec["coefficients"] is not None
                          and rec["coefficients"] == truth.coeffs.tolist())
    return rec


def simulated_run(cfg: ExperimentConfig) -> dict:
    """One run against a freshly simulated oracle (the bench path)."""
    f = planted_target(cfg)
    oracle = planted_oracle(f, cfg.eta, cfg.eta_bound,
                            derive_seed(cfg.seed, cfg.seed_label, "oracle"))
    return run_learn(cfg, oracle, truth=f)
