"""Learning a k-sparse target using only a sparsity approximator.

Two ways to find the relevant variables:

* ``psi``: shift the target by ``x_i`` (and ``alpha x_i`` over larger fields),
  estimate Psi of the shifted target, and read off whether the sparsity went
  down/stayed or went up by comparing against the table at the gap k.
* ``distinguisher``: threshold the approximator into a "k1-sparse vs. far"
  test, and re-randomise one coordinate at a time; a relevant coordinate turns
  the labels uniform and flips the test.

Coefficients come either from more Psi estimates (``psi``) or from repeated
k x k Gaussian elimination on examples restricted to the relevant coordinates
followed by hypothesis selection (``gauss``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import budget
from .approx import ApproximatorHandle
from .errors import (AmbiguousCoefficient, CalibrationAmbiguous, IntervalOverlap,
                     LearningFailed, NoIrrelevantIndex, PreconditionFailed)
from .field import Field
from .linmodel import GammaSpec, LinearFn
from .oracle import ExampleOracle, RandomizeCoordinate, ShiftLabel, uniform_label_oracle
from .psi import PsiTable, build_psi_table, estimate_psi_of_target, find_gap_k
from .seeding import derive_seed
from .selection import hypothesis_select

RELEVANT, IRRELEVANT, UNDECIDED = "relevant", "irrelevant", "undecided"
BAND_EPS = 1e-12


@dataclass
class RelevanceReport:
    verdicts: list[str]
    estimates: list[float]
    estimates_alpha: list[float] | None = None
    thresholds: dict = field(default_factory=dict)
    method: str = "psi"

    @property
    def relevant(self) -> list[int]:
        return [i for i, v in enumerate(self.verdicts) if v == RELEVANT]

    @property
    def undecided(self) -> list[int]:
        return [i for i, v in enumerate(self.verdicts) if v == UNDECIDED]

    def to_json(self) -> str:
        doc = {"method": self.method, "thresholds": self.thresholds,
               "verdicts": self.verdicts,
               "estimates": [float(f"{x:.12g}") for x in self.estimates]}
        if self.estimates_alpha is not None:
            doc["estimates_alpha"] = [float(f"{x:.12g}") for x in self.estimates_alpha]
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "RelevanceReport":
        doc = json.loads(text)
        return cls(doc["verdicts"], doc["estimates"], doc.get("estimates_alpha"),
                   doc["thresholds"], doc["method"])


def _in_band(x: float, center: float, half: float) -> bool:
    return abs(x - center) <= half + BAND_EPS


def _check_disjoint(low: float, high: float, half: float):
    if not low + half < high - half:
        raise IntervalOverlap(
            f"bands around {low:.6g} and {high:.6g} (half-width {half:.3g}) overlap")


# smallest element of F_q minus {0, 1} for every odd prime q
ALPHA = 2


def classify_variables_psi(A: ApproximatorHandle, table: PsiTable, k: int,
                           oracle: ExampleOracle, n: int, delta: float, seed: int, *,
                           fast: bool = False) -> RelevanceReport:
    q = oracle.field.q
    binary = q == 2
    half = 1 / (8 * n)
    low = table.psi(k - 1) if binary else table.psi(k)
    high = table.psi(k + 1)
    _check_disjoint(low, high, half)
    alpha = None if binary else ALPHA
    conf = delta / (8 * n)

    def est(shift, tag, i):
        view = oracle.spawn("classify", seed, tag, i, transforms=[ShiftLabel(shift)])
        return estimate_psi_of_target(A, view, n, half, conf,
                                      derive_seed(seed, "classify", tag, i), fast=fast)

    verdicts, ests, ests_alpha = [], [], None if binary else []
    for i in range(n):
        budget.poll()
        psi_1 = est({i: 1}, "x", i)
        ests.append(psi_1)
        if binary:
            if _in_band(psi_1, low, half):
                verdicts.append(RELEVANT)
            elif _in_band(psi_1, high, half):
                verdicts.append(IRRELEVANT)
            else:
                verdicts.append(UNDECIDED)
            continue
        psi_a = est({i: alpha}, "ax", i)
        ests_alpha.append(psi_a)
        # relevant: one of f + x_i, f + alpha x_i keeps sparsity k
        if _in_band(psi_1, low, half) or _in_band(psi_a, low, half):
            verdicts.append(RELEVANT)
        elif _in_band(psi_1, high, half) and _in_band(psi_a, high, half):
            verdicts.append(IRRELEVANT)
        else:
            verdicts.append(UNDECIDED)
    thresholds = {"k": k, "half_width": half, "relevant_center": low,
                  "irrelevant_center": high}
    if alpha is not None:
        thresholds["alpha"] = alpha
    return RelevanceReport(verdicts, ests, ests_alpha, thresholds, "psi")


def identify_relevant_distinguisher(A: ApproximatorHandle, gamma: GammaSpec, ctx: Field,
                                    n: int, k1: int, oracle: ExampleOracle,
                                    trials: int = 25, delta: float = 0.1,
                                    seed: int = 0) -> RelevanceReport:
    """Relevant variables of a k1-sparse target via coordinate re-randomisation.

    ``delta`` only matters when ``trials`` is None (then trials grows with
    log(n/delta)).
    """
    k2 = gamma.gamma(gamma.gamma(k1) + 1)
    if k2 > n + 1e-6:
        raise PreconditionFailed(f"gamma(gamma({k1}) + 1) = {k2:.4g} exceeds n = {n}")
    if trials is None:
        trials = budget.boost_reps(delta / (2 * n))
    cut = gamma.gamma_floor(k1)

    def far(view, s):
        return A(view, n, s) > cut

    calib = sum(far(uniform_label_oracle(ctx, n, oracle.eta_bound,
                                         derive_seed(seed, "calibrate", j)),
                    derive_seed(seed, "calibrate-run", j))
                for j in range(trials)) / trials
    if calib <= 1 / 3:
        raise CalibrationAmbiguous(
            f"uniform-label streams look k1-sparse ({1 - calib:.2f} of runs); "
            "this approximator cannot flag relevant variables at k1")
    if calib < 2 / 3:
        raise CalibrationAmbiguous(f"answer on uniform-label streams unstable ({calib:.2f} far)")

    verdicts, ests = [], []
    for i in range(n):
        budget.poll()
        votes = 0
        for j in range(trials):
            view = oracle.spawn("randomize", seed, i, j, transforms=[RandomizeCoordinate(i)])
            votes += far(view, derive_seed(seed, "randomize-run", i, j))
        frac = votes / trials
        ests.append(frac)
        if frac > 0.5:
            verdicts.append(RELEVANT)
        elif frac < 0.5:
            verdicts.append(IRRELEVANT)
        else:
            verdicts.append(UNDECIDED)
    return RelevanceReport(verdicts, ests, None,
                           {"k1": k1, "k2": k2, "cut": cut, "calibration_far": calib,
                            "trials": trials}, "distinguisher")


def recover_coefficients_psi(A: ApproximatorHandle, table: PsiTable, k: int,
                             oracle: ExampleOracle, relevant, n: int, delta: float,
                             seed: int, *, fast: bool = False) -> LinearFn:
    """Coefficient alpha of x_i is the one for which f - alpha x_i + x_j stays k-sparse."""
    field_ = oracle.field
    relevant = sorted(int(i) for i in relevant)
    if field_.q == 2:
        return LinearFn.from_terms(field_, n, {i: 1 for i in relevant})
    spare = sorted(set(range(n)) - set(relevant))
    if not spare:
        raise NoIrrelevantIndex("every variable is relevant; no spare index to add")
    j = spare[0]
    half = 1 / (8 * n)
    center, high = table.psi(k), table.psi(k + 1)
    _check_disjoint(center, high, half)
    conf = delta / (4 * (field_.q - 1) * max(1, len(relevant)))
    terms = {}
    for i in relevant:
        budget.poll()
        hits = []
        for alpha in range(1, field_.q):
            view = oracle.spawn("coeff", seed, i, alpha,
                                transforms=[ShiftLabel({i: -alpha % field_.q, j: 1})])
            psi = estimate_psi_of_target(A, view, n, half, conf,
                                         derive_seed(seed, "coeff", i, alpha), fast=fast)
            if _in_band(psi, center, half):
                hits.append(alpha)
        if len(hits) != 1:
            raise AmbiguousCoefficient(f"x_{i}: accepted coefficients {hits}")
        terms[i] = hits[0]
    return LinearFn.from_terms(field_, n, terms)


def gauss_solve(field_: Field, M: np.ndarray, y: np.ndarray) -> np.ndarray | None:
    """Solve the square system M x = y over F_q; None when M is singular."""
    q = field_.q
    k = M.shape[0]
    aug = np.concatenate([M % q, (y % q)[:, None]], axis=1).astype(np.int64)
    for col in range(k):
        piv = next((r for r in range(col, k) if aug[r, col]), None)
        if piv is None:
            return None
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] = (aug[col] * field_.inv(int(aug[col, col]))) % q
        others = aug[:, col].copy()
        others[col] = 0
        aug = (aug - others[:, None] * aug[col][None, :]) % q
    return aug[:, k]


def gauss_iterations(k: int, eta_bound: float, delta: float) -> int:
    """ceil(4 (1/(1-eta_b))^k ln(3/delta)): each draw is clean w.p. (1-eta_b)^k and
    non-singular w.p. >= 1/4."""
    return math.ceil(4 * (1 / (1 - eta_bound)) ** k * math.log(3 / delta))


def recover_coefficients_gauss(relevant, oracle: ExampleOracle, ctx: Field,
                               eta_bound: float, delta: float,
                               iterations: int | None = None) -> list[LinearFn]:
    """Candidates from repeated k x k eliminations on the relevant coordinates."""
    relevant = sorted(int(i) for i in relevant)
    k = len(relevant)
    if k < 1:
        raise PreconditionFailed("need at least one relevant variable")
    t = gauss_iterations(k, eta_bound, delta) if iterations is None else iterations
    n = oracle.n
    seen, out = set(), []
    for _ in range(t):
        a, b = oracle.draw(k)
        M = a[:, relevant]
        x = gauss_solve(ctx, M, b)
        if x is None:
            continue
        if not np.array_equal((M @ x) % ctx.q, b % ctx.q):
            raise ArithmeticError("elimination produced a non-solution")
        c = np.zeros(n, dtype=np.int64)
        c[relevant] = x
        f = LinearFn(ctx, c)
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out


def default_m(gamma: GammaSpec, n: int) -> int:
    """gamma^-1(gamma^-1(pi(n))) with pi(n) = ceil(log2 n), at least 1."""
    pi = max(1, math.ceil(math.log2(max(n, 2))))
    return max(1, math.floor(gamma.max_m(pi) + 1e-6))


def learn_sparse_k(A: ApproximatorHandle, gamma: GammaSpec, ctx: Field, n: int, m: int | None,
                   oracle: ExampleOracle, delta: float, seed: int, *,
                   relevance: str = "psi", coefficients: str = "gauss",
                   table: PsiTable | None = None, fast: bool = False, k: int | None = None,
                   distinguisher_trials: int = 25) -> LinearFn:
    """Properly learn Lin(F, k) for the k the table's gap search picks from ``m``.

    Raises :class:`LearningFailed` when the relevance step leaves undecided
    variables or finds a number of relevant variables other than k.
    """
    if relevance not in ("psi", "distinguisher") or coefficients not in ("psi", "gauss"):
        raise ValueError(f"unknown method {relevance}+{coefficients}")
    binary = ctx.q == 2
    if table is None:
        table = build_psi_table(A, gamma, ctx, n, oracle.eta_bound, 1 / (16 * n), delta / 4,
                                derive_seed(seed, "table"), fast=fast)
    if k is None:
        k = find_gap_k(table, default_m(gamma, n) if m is None else m, binary)

    if relevance == "psi":
        report = classify_variables_psi(A, table, k, oracle, n, delta,
                                        derive_seed(seed, "relevance"), fast=fast)
    else:
        report = identify_relevant_distinguisher(A, gamma, ctx, n, k, oracle,
                                                 distinguisher_trials, delta,
                                                 derive_seed(seed, "relevance"))
    rel = report.relevant
    if report.undecided or len(rel) != k:
        raise LearningFailed(f"relevance step found {len(rel)} relevant and "
                             f"{len(report.undecided)} undecided variables for k={k}")

    if coefficients == "psi":
        return recover_coefficients_psi(A, table, k, oracle, rel, n, delta,
                                        derive_seed(seed, "coefficients"), fast=fast)
    cands = recover_coefficients_gauss(rel, oracle.spawn("gauss", seed), ctx,
                                       oracle.eta_bound, delta / 3)
    if not cands:
        raise LearningFailed("every elimination was singular")
    return hypothesis_select(cands, oracle.spawn("select", seed), oracle.eta_bound, ctx,
                             delta / 3)
