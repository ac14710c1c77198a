"""Sparsity approximators: the handle contract plus reference implementations.

An approximator is called as ``A(oracle, n, seed)`` and returns an integer D in
``[0, n]``. The reductions only ever pass oracles; the band-cheat approximators
are the one exception and read the effective target through the oracle's
test-only ``peek_sparsity``.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .budget import boost_reps
from .errors import EmptyBand, TooLargeToEnumerate
from .field import Field
from .linmodel import GammaSpec
from .oracle import ExampleOracle, check_dim
from .seeding import derive_seed

CHEAT_MODES = ("exact", "midpoint", "uniform", "low", "high")
ENUMERATION_LIMIT = 1 << 20


@dataclass(frozen=True)
class ApproximatorHandle:
    name: str
    fn: Callable[[ExampleOracle, int, int], int] = field(repr=False)
    examples_per_call: int | None = None
    time_per_call_s: float | None = None
    failure_prob: float = 1 / 3
    # True when every successful run maps a d-sparse target to one fixed output
    deterministic_given_d: bool = False
    params: dict = field(default_factory=dict)

    def __call__(self, oracle: ExampleOracle, n: int, seed: int) -> int:
        check_dim(oracle, n)
        return min(max(int(self.fn(oracle, n, seed)), 0), n)

    def descriptor(self) -> dict:
        return {"name": self.name, **self.params}


def cheat_band_approximator(gamma: GammaSpec, mode: str = "midpoint",
                            random_label_d: int | None = None) -> ApproximatorHandle:
    """Test-only approximator that answers inside the gamma band of the true sparsity.

    ``exact`` returns d itself. On a stream whose labels are uniform (no target)
    it answers as if the sparsity were ``random_label_d`` (default: n, i.e. the
    stream looks like a dense function).
    """
    if mode not in CHEAT_MODES:
        raise ValueError(f"cheat mode must be one of {CHEAT_MODES}")

    def run(oracle, n, seed):
        d = oracle.peek_sparsity()
        if d is None:
            d = n if random_label_d is None else random_label_d
        if mode == "exact":
            return d
        lo, hi = gamma.band(d)
        if lo > hi:
            raise EmptyBand(f"empty gamma band [{lo}, {hi}] for d={d}")
        if mode == "low":
            return lo
        if mode == "high":
            return hi
        if mode == "midpoint":
            return math.floor((lo + hi) / 2 + 0.5)
        return lo + seed % (hi - lo + 1)

    params = {"mode": mode, "gamma": gamma.descriptor()}
    if random_label_d is not None:
        params["random_label_d"] = random_label_d
    return ApproximatorHandle(f"cheat-{mode}", run, examples_per_call=0, failure_prob=0.0,
                              deterministic_given_d=mode != "uniform", params=params)


def brute_force_sample_size(q: int, n: int, eta_bound: float, delta: float) -> int:
    """ceil(log(|C|/delta) / (1 - eta_b - 1/q)^2) with C all q^n linear functions."""
    gap = 1 - eta_bound - 1 / q
    if gap <= 0:
        raise ValueError("noise bound leaves no signal")
    return math.ceil((n * math.log(q) + math.log(1 / delta)) / gap ** 2)


@lru_cache(maxsize=8)
def _all_functions(q: int, n: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    powers = q ** np.arange(n, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % q


def brute_force_approximator(ctx: Field, n: int, eta_bound: float,
                             delta: float) -> ApproximatorHandle:
    """Maximum-agreement search over every linear function; returns its sparsity."""
    size = ctx.q ** n
    if size > ENUMERATION_LIMIT:
        raise TooLargeToEnumerate(f"{ctx.q}^{n} functions exceeds {ENUMERATION_LIMIT}")
    Q = brute_force_sample_size(ctx.q, n, eta_bound, delta)
    chunk = 1 << 14

    def run(oracle, n_call, seed):
        a, b = oracle.draw(Q)
        best, best_idx = -1, 0
        for start in range(0, size, chunk):
            funcs = _all_functions(ctx.q, n, start, min(size, start + chunk))
            agree = ((funcs @ a.T) % ctx.q == b[None, :]).sum(axis=1)
            j = int(np.argmax(agree))
            if agree[j] > best:
                best, best_idx = int(agree[j]), start + j
        d, x = 0, best_idx
        while x:
            d += x % ctx.q != 0
            x //= ctx.q
        return d

    return ApproximatorHandle("brute-force", run, examples_per_call=Q, failure_prob=delta,
                              deterministic_given_d=True,
                              params={"q": ctx.q, "n": n, "eta_bound": eta_bound,
                                      "delta": delta})


def clamp_to_delta(inner: ApproximatorHandle, gamma: GammaSpec) -> ApproximatorHandle:
    """Turn a gamma-approximation D into min(floor(gamma(D)), n)."""

    def run(oracle, n, seed):
        return min(gamma.gamma_floor(inner(oracle, n, seed)), n)

    return ApproximatorHandle(f"clamp({inner.name})", run, inner.examples_per_call,
                              inner.time_per_call_s, inner.failure_prob,
                              inner.deterministic_given_d,
                              {"inner": inner.descriptor(), "gamma": gamma.descriptor()})


def boost_median(inner: ApproximatorHandle, target_delta: float) -> ApproximatorHandle:
    r = boost_reps(target_delta)

    def run(oracle, n, seed):
        return statistics.median_low(
            inner(oracle, n, derive_seed(seed, "median", i)) for i in range(r))

    per = None if inner.examples_per_call is None else r * inner.examples_per_call
    t = None if inner.time_per_call_s is None else r * inner.time_per_call_s
    return ApproximatorHandle(f"median({inner.name})", run, per, t, target_delta,
                              inner.deterministic_given_d,
                              {"inner": inner.descriptor(), "reps": r})


def approximator_from_config(name: str, gamma: GammaSpec, field_: Field, n: int,
                             eta_bound: float, *, mode: str = "exact",
                             delta: float | None = None, clamp: bool = False,
                             random_label_d: int | None = None) -> ApproximatorHandle:
    """Build a handle from harness settings."""
    if name == "cheat":
        h = cheat_band_approximator(gamma, mode, random_label_d)
    elif name == "brute-force":
        if delta is None:
            delta = 1 / (field_.q * n ** 7)
        h = brute_force_approximator(field_, n, eta_bound, delta)
    else:
        raise ValueError(f"unknown approximator {name!r}")
    return clamp_to_delta(h, gamma) if clamp else h
