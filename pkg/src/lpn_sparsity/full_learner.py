"""From k-sparse learners to all sparsities and to unknown noise rates."""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction
from typing import Callable

import numpy as np

from . import budget
from .approx import ApproximatorHandle
from .budget import LearnerBudget, boost_reps as _boost_reps
from .errors import (AllRunsFailed, AmbiguousCoefficient, CalibrationAmbiguous,
                     ContractViolation, LearningFailed, NoGapFound, NoIrrelevantIndex,
                     NoMajority, PreconditionFailed)
from .field import Field
from .linmodel import GammaSpec, LinearFn
from .oracle import ExampleOracle, MagnifyNoise, Pad, ShiftLabel
from .psi import PsiTable, build_psi_table, find_gap_k
from .seeding import derive_seed, make_rng
from .selection import hypothesis_select, score_hypotheses
from .sparse_reduction import default_m, learn_sparse_k

__all__ = ["LearnerBudget", "hypothesis_select", "boost_mode", "learn_d_sparse_via_shift",
           "pad_to_big_n", "eta_sweep", "learn_parity_full", "learn_sparse_pipeline",
           "RUN_FAILURES"]

# outcomes of a single learner run that mean "no hypothesis", not a bug
RUN_FAILURES = (LearningFailed, ContractViolation, CalibrationAmbiguous,
                NoIrrelevantIndex, AmbiguousCoefficient)

Learner = Callable[[ExampleOracle, int], LinearFn]


def boost_mode(learner: Learner, reps: int, deterministic: bool | None = None) -> Learner:
    """Run ``learner`` up to ``reps`` times on fresh streams and return the modal output.

    Stops early once one hypothesis holds a strict majority of ``reps`` (the mode
    can no longer change). Failed runs count as votes for nothing. A learner declared
    deterministic (argument, or a truthy ``deterministic`` attribute) runs once.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if deterministic is None:
        deterministic = bool(getattr(learner, "deterministic", False))
    if deterministic:
        reps = 1

    def boosted(oracle: ExampleOracle, seed: int) -> LinearFn:
        votes: Counter = Counter()
        for r in range(reps):
            budget.poll()
            try:
                h = learner(oracle.spawn("mode", seed, r), derive_seed(seed, "mode", r))
            except RUN_FAILURES:
                continue
            votes[h] += 1
            if votes[h] * 2 > reps:
                return h
        if votes:
            h, c = votes.most_common(1)[0]
            raise NoMajority(f"mode {h!r} won only {c} of {reps} runs")
        raise NoMajority(f"all {reps} runs failed")

    return boosted


def shift_success_bound(d: int, k: int, n: int) -> float:
    """prod_{i=d}^{k} (1 - i/n), a lower bound on the chance no shift index is relevant."""
    return math.prod(1 - i / n for i in range(d, k + 1))


def draw_shift_indices(n: int, count: int, rng: np.random.Generator) -> list[int]:
    return sorted(rng.choice(n, size=count, replace=False).tolist()) if count else []


def learn_d_sparse_via_shift(learner_k: Learner, k: int, d: int, ctx: Field, n: int,
                             oracle: ExampleOracle, gamma: GammaSpec, delta: float,
                             seed: int, reps: int | None = None) -> LinearFn:
    """Learn a d-sparse target with a Lin(F, k) learner by adding k - d random variables."""
    if not 1 <= d <= k <= n:
        raise PreconditionFailed(f"need 1 <= d={d} <= k={k} <= n={n}")
    if 12 * gamma.big_gamma(d) ** 2 > n + 1e-6:
        raise PreconditionFailed(f"12 Gamma({d})^2 = {12 * gamma.big_gamma(d) ** 2:.4g} > n = {n}")

    def one_run(orc: ExampleOracle, s: int) -> LinearFn:
        idx = draw_shift_indices(n, k - d, make_rng(derive_seed(s, "shift-idx")))
        shift = {i: 1 for i in idx}
        g = learner_k(orc.spawn("shifted", s, transforms=[ShiftLabel(shift)]),
                      derive_seed(s, "inner"))
        return g - LinearFn.from_terms(ctx, n, shift)

    reps = _boost_reps(delta) if reps is None else reps
    return boost_mode(one_run, reps)(oracle, seed)


def big_n(gamma: GammaSpec, n: int) -> int:
    """N(n) = 12 Gamma(n)^2, rounded up."""
    return math.ceil(12 * gamma.big_gamma(n) ** 2 - 1e-6)


def pad_to_big_n(oracle: ExampleOracle, ctx: Field, n: int, gamma: GammaSpec):
    """(oracle whose examples carry N - n extra uniform dummy coordinates, N)."""
    N = big_n(gamma, n)
    return oracle.spawn("pad", N, transforms=[Pad(N)]), N


def sweep_grid(eta_bound: float, grid_steps: int) -> list[Fraction]:
    """j * eta_b / grid_steps for j = 1..grid_steps (always ends at eta_b)."""
    if grid_steps < 1:
        raise ValueError("grid_steps must be >= 1")
    eb = Fraction(str(eta_bound))
    return [eb * j / grid_steps for j in range(1, grid_steps + 1)]


def default_grid_steps(examples: int) -> int:
    return min(1 + math.ceil(10 * examples), 10_000)


def eta_sweep(learn_at_eta_b: Learner, oracle: ExampleOracle, eta_bound: float, ctx: Field,
              grid_steps: int, delta: float, seed: int, pool: list | None = None) -> LinearFn:
    """Run the learner once per assumed noise rate, magnifying each to eta_b, then select."""
    hyps = []
    for j, eta_j in enumerate(sweep_grid(eta_bound, grid_steps)):
        budget.poll()
        view = oracle.spawn("sweep", seed, j, transforms=[MagnifyNoise(float(eta_j), eta_bound)])
        try:
            hyps.append(learn_at_eta_b(view, derive_seed(seed, "sweep", j)))
        except RUN_FAILURES:
            continue
    if not hyps:
        raise AllRunsFailed(f"no hypothesis from any of {grid_steps} noise levels")
    winner, cands, rates = score_hypotheses(hyps, oracle.spawn("sweep-select", seed),
                                            eta_bound, ctx, delta)
    if pool is not None:
        pool.extend(zip(cands, rates.tolist()))
    return winner


def learn_parity_full(A: ApproximatorHandle, gamma: GammaSpec, ctx: Field, n: int,
                      oracle: ExampleOracle, delta: float, seed: int, *,
                      relevance: str = "psi", coefficients: str = "psi", fast: bool = False,
                      table: PsiTable | None = None, reps: int | None = None,
                      pool: list | None = None) -> LinearFn:
    """Learn any linear function on n variables.

    Pads to N = 12 Gamma(n)^2 variables, builds one table at N, runs the shifted
    d-sparse learner for every d = 1..n, keeps hypotheses supported on the first n
    coordinates, adds the zero function and selects by agreement.
    """
    padded, N = pad_to_big_n(oracle, ctx, n, gamma)
    binary = ctx.q == 2
    if table is None:
        table = build_psi_table(A, gamma, ctx, N, oracle.eta_bound, 1 / (16 * N), delta / 4,
                                derive_seed(seed, "table"), fast=fast)
    elif table.n != N:
        raise PreconditionFailed(f"table has n={table.n}, padded dimension is {N}")
    candidates = [LinearFn.zero(ctx, n)]
    for d in range(1, n + 1):
        try:
            k = find_gap_k(table, d, binary)
        except NoGapFound:
            continue

        def learner_k(orc, s, k=k, d=d):
            return learn_sparse_k(A, gamma, ctx, N, d, orc, delta / (4 * n), s,
                                  relevance=relevance, coefficients=coefficients,
                                  table=table, fast=fast, k=k)

        try:
            g = learn_d_sparse_via_shift(learner_k, k, d, ctx, N, padded, gamma,
                                         delta / (4 * n), derive_seed(seed, "sparsity", d), reps)
        except RUN_FAILURES:
            continue
        h = g.project(n)
        if h is not None:
            candidates.append(h)
    winner, cands, rates = score_hypotheses(candidates, oracle.spawn("full-select", seed),
                                            oracle.eta_bound, ctx, delta / 2)
    if pool is not None:
        pool.extend(zip(cands, rates.tolist()))
    return winner


def learn_sparse_pipeline(A: ApproximatorHandle, gamma: GammaSpec, ctx: Field, n: int,
                          oracle: ExampleOracle, delta: float, seed: int, *,
                          m: int | None = None, k: int | None = None, relevance: str = "psi",
                          coefficients: str = "gauss", fast: bool = False,
                          table: PsiTable | None = None, sweep: bool = False,
                          grid_steps: int = 50, distinguisher_trials: int = 25,
                          pool: list | None = None) -> LinearFn:
    """Learn Lin(F, k) for the gap sparsity k above m (default from pi(n) = ceil(log2 n)).

    With ``sweep`` the true noise rate is treated as unknown and only the bound is used.
    """
    m = default_m(gamma, n) if m is None else m
    if table is None:
        table = build_psi_table(A, gamma, ctx, n, oracle.eta_bound, 1 / (16 * n), delta / 4,
                                derive_seed(seed, "table"), fast=fast)

    def run(orc, s):
        return learn_sparse_k(A, gamma, ctx, n, m, orc, delta / 2, s, relevance=relevance,
                              coefficients=coefficients, table=table, fast=fast, k=k,
                              distinguisher_trials=distinguisher_trials)

    if not sweep:
        h = run(oracle, seed)
        if pool is not None:
            pool.append((h, float("nan")))
        return h
    return eta_sweep(run, oracle, oracle.eta_bound, ctx, grid_steps, delta / 2, seed, pool)
