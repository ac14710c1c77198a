"""Choosing among candidate linear functions by empirical label agreement."""

from __future__ import annotations

import math

import numpy as np

from .errors import EmptyCandidateSet
from .field import Field
from .linmodel import LinearFn
from .oracle import ExampleOracle

CHUNK = 512


def selection_sample_size(num_candidates: int, q: int, eta_bound: float, delta: float) -> int:
    """ceil(32 ln(2|C|/delta) / (1 - eta_b - 1/q)^2).

    Chernoff at additive error (1 - eta_b - 1/q)/4 with confidence delta/|C| per
    candidate: the target agrees at rate 1 - eta, any other function at 1/q.
    """
    gap = 1 - eta_bound - 1 / q
    if gap <= 0:
        raise ValueError("noise bound leaves no signal")
    return math.ceil(32 * math.log(2 * num_candidates / delta) / gap ** 2)


def _unique(candidates):
    seen, out = set(), []
    for c in candidates:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def agreement_rates(candidates: list[LinearFn], oracle: ExampleOracle, Q: int) -> np.ndarray:
    q = oracle.field.q
    C = np.stack([c.coeffs for c in candidates])
    hits = np.zeros(len(candidates), dtype=np.int64)
    left = Q
    while left > 0:
        m = min(CHUNK, left)
        a, b = oracle.draw(m)
        hits += ((C @ a.T) % q == b[None, :]).sum(axis=1)
        left -= m
    return hits / Q


def score_hypotheses(C, oracle: ExampleOracle, eta_bound: float, ctx: Field, delta: float):
    """(winner, candidates, agreement rates) for audit dumps."""
    cands = _unique(C)
    if not cands:
        raise EmptyCandidateSet("no candidates to select from")
    if len(cands) == 1:
        return cands[0], cands, np.array([np.nan])
    Q = selection_sample_size(len(cands), ctx.q, eta_bound, delta)
    rates = agreement_rates(cands, oracle, Q)
    return cands[int(np.argmax(rates))], cands, rates


def hypothesis_select(C, oracle: ExampleOracle, eta_bound: float, ctx: Field, delta: float,
                      seed: int | None = None) -> LinearFn:
    """Candidate with the highest empirical agreement on fresh examples."""
    return score_hypotheses(C, oracle, eta_bound, ctx, delta)[0]
