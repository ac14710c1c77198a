"""Cooperative run budgets.

A :class:`LearnerBudget` is activated with ``with budget.active():``; oracles
charge every example they hand out and long loops call :func:`poll`.
Exceeding a cap raises :class:`~lpn_sparsity.errors.BudgetExceeded`.
"""

from __future__ import annotations

import contextvars
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

from .errors import BudgetExceeded

_active: contextvars.ContextVar["LearnerBudget | None"] = contextvars.ContextVar(
    "lpn_budget", default=None)


@dataclass
class LearnerBudget:
    delta: float = 0.1
    boost_reps: int | None = None
    example_cap: int | None = None
    wall_cap_s: float | None = None
    examples_used: int = field(default=0, init=False)
    _t0: float | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0, 1)")
        for name in ("boost_reps", "example_cap", "wall_cap_s"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")

    @contextmanager
    def active(self):
        self._t0 = time.monotonic()
        token = _active.set(self)
        try:
            yield self
        finally:
            _active.reset(token)

    def elapsed(self) -> float:
        return 0.0 if self._t0 is None else time.monotonic() - self._t0

    def check(self):
        if self.example_cap is not None and self.examples_used > self.example_cap:
            raise BudgetExceeded(f"example cap {self.example_cap} exceeded")
        if self.wall_cap_s is not None and self.elapsed() > self.wall_cap_s:
            raise BudgetExceeded(f"wall-clock cap {self.wall_cap_s}s exceeded")


def charge_examples(m: int):
    b = _active.get()
    if b is not None:
        b.examples_used += m
        b.check()


def poll():
    b = _active.get()
    if b is not None:
        b.check()


def boost_reps(delta: float) -> int:
    """Repetitions for median/mode boosting: ceil(18 ln(1/delta))."""
    return max(1, math.ceil(18 * math.log(1 / delta)))
