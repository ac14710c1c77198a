"""Expected-approximator-output tables and the gap search over them.

``Psi(d)`` is the mean output of a Delta-approximator on a uniformly random
d-sparse target, conditioned on the run landing in ``[d, Delta(d)]``. Tables are
built offline by simulating targets; :func:`estimate_psi_of_target` measures the
same quantity for an unknown target by randomly permuting and rescaling its
example stream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import budget
from .approx import ApproximatorHandle
from .errors import NoGapFound, PreconditionFailed, RejectionStall
from .field import Field
from .linmodel import GammaSpec, sample_sparse_linear
from .oracle import ExampleOracle, PermuteScale, planted_oracle
from .seeding import derive_seed, make_rng

STALL_WINDOW = 1000
GAP_EPS = 1e-12


def table_trials(n: int, h: float, delta: float) -> int:
    """Accepted trials per entry so that all n entries are h-accurate w.p. 1 - delta/2.

    Outputs lie in [0, n]; two-sided Hoeffding at confidence delta/(2n) per entry.
    """
    return math.ceil(n * n / (2 * h * h) * math.log(4 * n / delta))


def estimate_trials(n: int, h: float, delta: float) -> int:
    return math.ceil(n * n / (2 * h * h) * math.log(2 / delta))


@dataclass
class PsiTable:
    n: int
    values: list[float]
    h: float
    gamma: GammaSpec
    eta_bound: float = 0.0
    q: int = 2
    trials_per_d: int = 0
    approximator: dict = field(default_factory=dict)
    seed: int = 0
    attempts: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.values = [float(v) for v in self.values]
        if len(self.values) != self.n:
            raise ValueError(f"table needs {self.n} values, got {len(self.values)}")

    def psi(self, d: int) -> float:
        if d == 0:
            return 0.0
        if not 1 <= d <= self.n:
            raise IndexError(f"no table entry for d={d}")
        return self.values[d - 1]

    __getitem__ = psi

    def sanity_violations(self) -> list[int]:
        """Entries breaking d <= Psi'(d) + h and Psi'(d) - h <= Delta(d)."""
        bad = []
        for d in range(1, self.n + 1):
            v = self.psi(d)
            if not (d <= v + self.h + GAP_EPS
                    and v - self.h <= self.gamma.delta_int(d, self.n) + GAP_EPS
                    and -GAP_EPS <= v <= self.n + self.h + GAP_EPS):
                bad.append(d)
        return bad

    def telescoping_gain(self, m: int) -> float | None:
        """Psi'(Delta(m)+1) - Psi'(m), or None when Delta(m)+1 is off the table."""
        top = self.gamma.delta_int(m, self.n) + 1
        if top > self.n:
            return None
        return self.psi(top) - self.psi(m)

    def to_json(self) -> str:
        def r(x):
            return float(f"{x:.12g}")

        doc = {
            "q": self.q,
            "n": self.n,
            "eta_bound": r(self.eta_bound),
            "h": r(self.h),
            "gamma": self.gamma.descriptor(),
            "approximator": self.approximator,
            "seed": self.seed,
            "trials_per_d": self.trials_per_d,
            "values": [r(v) for v in self.values],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "PsiTable":
        doc = json.loads(text)
        return cls(n=doc["n"], values=doc["values"], h=doc["h"],
                   gamma=GammaSpec.from_descriptor(doc["gamma"], doc["n"]),
                   eta_bound=doc["eta_bound"], q=doc["q"],
                   trials_per_d=doc["trials_per_d"], approximator=doc["approximator"],
                   seed=doc["seed"])


def build_psi_table(A: ApproximatorHandle, gamma: GammaSpec, ctx: Field, n: int,
                    eta_bound: float, h: float, delta: float, seed: int, *,
                    fast: bool = False, trials_per_d: int | None = None) -> PsiTable:
    """Monte-Carlo table of Psi'(d), d = 1..n, with rejection outside [d, Delta(d)].

    In fast mode a deterministic-given-d approximator is sampled once per entry.
    """
    if not 0 < h < 1:
        raise PreconditionFailed("table error h must be in (0, 1)")
    if trials_per_d is None:
        trials_per_d = 1 if fast and A.deterministic_given_d else table_trials(n, h, delta)
    values, attempts = [], []
    for d in range(1, n + 1):
        budget.poll()
        hi = gamma.delta_int(d, n)
        total = accepted = 0
        win_att = win_acc = 0
        att = 0
        while accepted < trials_per_d:
            f = sample_sparse_linear(ctx, n, d, make_rng(derive_seed(seed, "psi-f", d, att)))
            oracle = planted_oracle(f, eta_bound, eta_bound, derive_seed(seed, "psi-oracle", d, att))
            D = A(oracle, n, derive_seed(seed, "psi-run", d, att))
            att += 1
            win_att += 1
            if d <= D <= hi:
                accepted += 1
                win_acc += 1
                total += D
            if win_att == STALL_WINDOW:
                if win_acc < STALL_WINDOW // 2:
                    raise RejectionStall(
                        f"d={d}: only {win_acc}/{STALL_WINDOW} runs landed in [{d}, {hi}]")
                win_att = win_acc = 0
        values.append(total / trials_per_d)
        attempts.append(att)
    return PsiTable(n=n, values=values, h=h, gamma=gamma.with_cap(n), eta_bound=eta_bound,
                    q=ctx.q, trials_per_d=trials_per_d, approximator=A.descriptor(),
                    seed=seed, attempts=attempts)


def estimate_psi_of_target(A: ApproximatorHandle, oracle: ExampleOracle, n: int, h: float,
                           delta: float, seed: int, *, fast: bool = False,
                           tau: int | None = None) -> float:
    """Mean approximator output over randomly permuted and rescaled views of the stream."""
    if tau is None:
        tau = 1 if fast and A.deterministic_given_d else estimate_trials(n, h, delta)
    total = 0
    for i in range(tau):
        view = oracle.spawn("psi-est", seed, i,
                            transforms=[PermuteScale(seed=derive_seed(seed, "perm", i))])
        total += A(view, n, derive_seed(seed, "psi-est-run", i))
    return total / tau


def find_gap_k(table: PsiTable, m: int, binary: bool) -> int:
    """Smallest k in [m, Delta(m)+1] whose Psi' step clears 7/(8n).

    Non-binary fields test Psi'(k+1) - Psi'(k); the binary field tests
    Psi'(k+1) - Psi'(k-1) with Psi'(0) = 0. k+1 must stay on the table.
    """
    n = table.n
    if not 1 <= m <= table.gamma.max_m(n) + 1e-6:
        raise PreconditionFailed(
            f"m={m} outside [1, gamma^-1(gamma^-1({n}))={table.gamma.max_m(n):.4g}]")
    need = 7 / (8 * n) - GAP_EPS
    top = min(table.gamma.delta_int(m, n) + 1, n - 1)
    for k in range(m, top + 1):
        lower = table.psi(k - 1) if binary else table.psi(k)
        if table.psi(k + 1) - lower >= need:
            return k
    raise NoGapFound(f"no step >= 7/(8n) in k = {m}..{top}")
