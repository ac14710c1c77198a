"""Command line entry point: gen, psi-table, reduce, learn, verify, bench.

Exit codes: 0 success, 1 verification mismatch or no hypothesis, 2 usage error,
3 budget exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import typing

from ..errors import BudgetExceeded, PreconditionFailed, TooLargeToEnumerate
from ..field import make_field
from ..psi import find_gap_k
from ..sparse_reduction import (classify_variables_psi, default_m,
                                identify_relevant_distinguisher)
from ..seeding import derive_seed
from . import bench as bench_mod
from . import instances
from .config import ConfigError, ExperimentConfig, base_type
from .runner import budget_for, gap_start, make_approximator, make_table, run_learn

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

log = logging.getLogger("lpn_sparsity")


class UsageError(Exception):
    pass


def add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="FILE", help="YAML config; flags override its keys")
    hints = typing.get_type_hints(ExperimentConfig)
    for f in dataclasses.fields(ExperimentConfig):
        t, _ = base_type(hints[f.name])
        flag = "--" + f.name.replace("_", "-")
        if t is bool:
            p.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction,
                           default=argparse.SUPPRESS)
        else:
            p.add_argument(flag, dest=f.name, default=argparse.SUPPRESS, metavar=t.__name__.upper())


def config_from_args(args) -> ExperimentConfig:
    doc = ExperimentConfig().to_dict()
    if getattr(args, "config", None):
        with open(args.config) as fh:
            doc.update(ExperimentConfig.from_yaml(fh.read()).to_dict())
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    doc.update({k: v for k, v in vars(args).items() if k in names})
    return ExperimentConfig.from_dict(doc)


def emit(path: str | None, text: str, append: bool = False):
    if path is None:
        sys.stdout.write(text)
        return
    if append:
        try:
            with open(path) as fh:
                text = fh.read() + text
        except FileNotFoundError:
            pass
    instances.atomic_write(path, text)


def load_instance(cfg: ExperimentConfig) -> instances.Instance:
    if not cfg.instance:
        raise UsageError("--instance is required")
    inst = instances.load(cfg.instance)
    if (inst.field.q, inst.n) != (cfg.q, cfg.n):
        raise UsageError(f"instance has q={inst.field.q}, n={inst.n}; config says "
                         f"q={cfg.q}, n={cfg.n}")
    if inst.eta_bound != cfg.eta_bound:
        raise UsageError("instance and config disagree on eta_bound")
    return inst


def instance_oracle(cfg, inst):
    if cfg.approximator == "cheat" and not inst.is_open:
        raise UsageError("the cheat approximator needs an open instance")
    return inst.oracle(reveal=cfg.approximator == "cheat")


# -- subcommands --------------------------------------------------------------------

def cmd_gen(cfg, args) -> int:
    inst = instances.generate(cfg)
    path = cfg.instance or cfg.output
    if cfg.challenge:
        if path is None:
            raise UsageError("challenge instances need --instance or --output")
        sealed = cfg.sealed or path + ".sealed"
        instances.atomic_write(sealed, inst.dumps())
        emit(path, inst.sealed().dumps())
    else:
        emit(path, inst.dumps())
    return EXIT_OK


def cmd_psi_table(cfg, args) -> int:
    with budget_for(cfg).active():
        table = make_table(cfg.replace(psi_table=None), make_approximator(cfg))
    emit(cfg.output or cfg.psi_table, table.to_json() + "\n")
    return EXIT_OK


def cmd_reduce(cfg, args) -> int:
    if cfg.method != "sparse":
        raise UsageError("reduce works on the sparse method only")
    inst = load_instance(cfg)
    oracle = instance_oracle(cfg, inst)
    ctx, gamma = make_field(cfg.q), cfg.gamma_spec()
    seed = derive_seed(cfg.seed, cfg.seed_label, "reduce")
    with budget_for(cfg).active():
        A = make_approximator(cfg)
        table = make_table(cfg, A)
        m = gap_start(cfg) or default_m(gamma, cfg.n)
        k = cfg.k if cfg.k is not None else find_gap_k(table, m, ctx.q == 2)
        if cfg.relevance == "psi":
            report = classify_variables_psi(A, table, k, oracle, cfg.n, cfg.delta, seed,
                                            fast=cfg.fast)
        else:
            report = identify_relevant_distinguisher(A, gamma, ctx, cfg.n, k, oracle,
                                                     cfg.distinguisher_trials, cfg.delta, seed)
    emit(cfg.output, report.to_json() + "\n")
    return EXIT_OK


def cmd_learn(cfg, args) -> int:
    inst = load_instance(cfg)
    oracle = instance_oracle(cfg, inst)
    pool = [] if cfg.pool_dump else None
    rec = run_learn(cfg, oracle, truth=inst.target, pool=pool)
    emit(cfg.output, json.dumps(rec) + "\n", append=True)
    if cfg.pool_dump:
        lines = [json.dumps({"coefficients": h.coeffs.tolist(),
                             "agreement": None if r != r else r}) for h, r in pool]
        emit(cfg.pool_dump, "".join(line + "\n" for line in lines))
    if rec.get("partial"):
        log.error("%s", rec["error"])
        return EXIT_BUDGET
    if rec["coefficients"] is None:
        log.error("%s", rec.get("error", "no hypothesis"))
        if rec.get("error", "").startswith("PreconditionFailed"):
            return EXIT_USAGE
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_verify(args) -> int:
    with open(args.result) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise UsageError(f"{args.result} holds no result record")
    rec = json.loads(lines[-1])
    inst = instances.load(args.instance)
    if not inst.is_open:
        raise UsageError(f"{args.instance} has no coefficient line to verify against")
    got = rec.get("coefficients")
    if got is not None and got == inst.target.coeffs.tolist():
        print("match")
        return EXIT_OK
    print("mismatch")
    return EXIT_MISMATCH


def cmd_bench(args) -> int:
    with open(args.matrix) as fh:
        configs = bench_mod.load_matrix(fh.read())
    rows, note = bench_mod.run_matrix(configs, jobs=args.jobs, wall_cap_s=args.wall_cap)
    emit(args.output, bench_mod.to_csv(rows, note))
    return EXIT_BUDGET if note else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lpn-sparsity", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("gen", "write an instance file"),
                           ("psi-table", "build an expected-output table"),
                           ("reduce", "classify variables of an instance"),
                           ("learn", "learn the target of an instance")):
        add_config_flags(sub.add_parser(name, help=helptext))
    v = sub.add_parser("verify", help="compare a learn record with an open instance")
    v.add_argument("--result", required=True)
    v.add_argument("--instance", required=True)
    b = sub.add_parser("bench", help="run a config matrix and write CSV")
    b.add_argument("--matrix", required=True)
    b.add_argument("--output")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--wall-cap", type=float, default=None)
    return p


COMMANDS = {"gen": cmd_gen, "psi-table": cmd_psi_table, "reduce": cmd_reduce,
            "learn": cmd_learn}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "bench":
            return cmd_bench(args)
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg, args)
    except (UsageError, ConfigError, instances.InstanceParseError, TooLargeToEnumerate,
            PreconditionFailed, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
