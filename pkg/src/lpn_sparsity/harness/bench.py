"""Config matrices: expand, run (optionally in parallel) and write one CSV row per run."""

from __future__ import annotations

import csv
import io
import itertools
import time
from concurrent.futures import ProcessPoolExecutor

import yaml

from .config import ConfigError, ExperimentConfig
from .runner import simulated_run

COLUMNS = ["q", "n", "d", "gamma", "approximator", "method", "eta", "eta_bound", "seed",
           "examples_used", "wall_ms", "success"]


def expand_matrix(doc: dict | None) -> list[ExperimentConfig]:
    """``base`` plus either ``grid`` (cartesian product, keys in file order) or ``runs``."""
    doc = doc or {}
    extra = set(doc) - {"base", "grid", "runs"}
    if extra:
        raise ConfigError(f"unknown matrix keys: {sorted(extra)}")
    base = doc.get("base") or {}
    if "grid" in doc and "runs" in doc:
        raise ConfigError("give either grid or runs, not both")
    if "grid" in doc:
        grid = doc["grid"] or {}
        keys = list(grid)
        combos = itertools.product(*(grid[k] for k in keys)) if keys else iter(())
        overrides = [dict(zip(keys, c)) for c in combos]
    else:
        overrides = list(doc.get("runs") or [])
    return [ExperimentConfig.from_dict({**ExperimentConfig().to_dict(), **base, **o})
            for o in overrides]


def load_matrix(text: str) -> list[ExperimentConfig]:
    return expand_matrix(yaml.safe_load(text))


def method_label(cfg: ExperimentConfig) -> str:
    s = f"{cfg.method}:{cfg.relevance}+{cfg.coefficients}"
    return s + ("+sweep" if cfg.sweep else "")


def approximator_label(cfg: ExperimentConfig) -> str:
    if cfg.approximator == "cheat":
        return f"cheat-{cfg.approx_mode}"
    return cfg.approximator


def row_for(cfg: ExperimentConfig, rec: dict) -> dict:
    return {"q": cfg.q, "n": cfg.n, "d": cfg.d, "gamma": cfg.gamma_spec().label(),
            "approximator": approximator_label(cfg), "method": method_label(cfg),
            "eta": cfg.eta, "eta_bound": cfg.eta_bound, "seed": cfg.seed,
            "examples_used": rec["examples_used"], "wall_ms": rec["wall_ms"],
            "success": int(bool(rec.get("success")))}


def _run(cfg: ExperimentConfig) -> tuple[dict, bool]:
    rec = simulated_run(cfg)
    return row_for(cfg, rec), bool(rec.get("partial"))


def run_matrix(configs: list[ExperimentConfig], jobs: int = 1,
               wall_cap_s: float | None = None) -> tuple[list[dict], str | None]:
    """Rows in matrix order, plus a note when the run was cut short or hit a cap."""
    t0 = time.monotonic()
    rows, capped = [], 0

    def over():
        return wall_cap_s is not None and time.monotonic() - t0 > wall_cap_s

    if jobs <= 1:
        for cfg in configs:
            if over():
                break
            row, partial = _run(cfg)
            rows.append(row)
            capped += partial
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futures = [ex.submit(_run, cfg) for cfg in configs]
            for fut in futures:
                if over():
                    for f in futures:
                        f.cancel()
                    break
                row, partial = fut.result()
                rows.append(row)
                capped += partial
    note = None
    if len(rows) < len(configs) or capped:
        note = (f"partial: {len(rows)} of {len(configs)} runs completed, "
                f"{capped} hit a budget cap")
    return rows, note


def to_csv(rows: list[dict], note: str | None = None) -> str:
    out = io.StringIO()
    w = csv.DictWriter(out, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if note:
        out.write(f"# {note}\n")
    return out.getvalue()
