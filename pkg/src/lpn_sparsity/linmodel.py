"""Linear functions over F_q, the approximation-band function, and example transforms.

Indices are 0-based throughout. The example transforms accept either a single
example (``a`` of shape ``(n,)``) or a batch (``a`` of shape ``(m, n)`` with ``b``
of shape ``(m,)``); the transforms in :mod:`lpn_sparsity.oracle` use the batch form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (BadRates, BadSparsity, DimensionMismatch, OutOfDomain,
                     ShrinkNotAllowed, ZeroScale)
from .field import Field

# outward rounding applied before comparing a real band edge with an integer
EDGE_SLACK = 1e-6
INV_TOL = 1e-9


class LinearFn:
    """``x -> sum(coeffs[i] * x[i])`` over a prime field."""

    __slots__ = ("field", "coeffs", "_hash")

    def __init__(self, field: Field, coeffs):
        arr = np.array(coeffs, dtype=np.int64).reshape(-1) % field.q
        if arr.size < 1:
            raise DimensionMismatch("a linear function needs n >= 1 variables")
        arr.setflags(write=False)
        self.field = field
        self.coeffs = arr
        self._hash = None

    @classmethod
    def zero(cls, field: Field, n: int) -> "LinearFn":
        return cls(field, np.zeros(n, dtype=np.int64))

    @classmethod
    def from_terms(cls, field: Field, n: int, terms: dict) -> "LinearFn":
        c = np.zeros(n, dtype=np.int64)
        for i, v in terms.items():
            c[i] = v
        return cls(field, c)

    @property
    def n(self) -> int:
        return self.coeffs.size

    @property
    def sparsity(self) -> int:
        return int(np.count_nonzero(self.coeffs))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.coeffs)

    def terms(self) -> dict[int, int]:
        idx = self.support
        return dict(zip(idx.tolist(), self.coeffs[idx].tolist()))

    def __call__(self, a):
        a = np.asarray(a, dtype=np.int64)
        if a.shape[-1] != self.n:
            raise DimensionMismatch(f"expected {self.n} coordinates, got {a.shape[-1]}")
        r = self.field.dot(a, self.coeffs)
        return int(r) if a.ndim == 1 else r

    def _check(self, other: "LinearFn"):
        if other.field.q != self.field.q or other.n != self.n:
            raise DimensionMismatch("linear functions over different fields/dimensions")

    def __add__(self, other: "LinearFn") -> "LinearFn":
        self._check(other)
        return LinearFn(self.field, self.coeffs + other.coeffs)

    def __sub__(self, other: "LinearFn") -> "LinearFn":
        self._check(other)
        return LinearFn(self.field, self.coeffs - other.coeffs)

    def __neg__(self) -> "LinearFn":
        return LinearFn(self.field, -self.coeffs)

    def scale(self, c: int) -> "LinearFn":
        return LinearFn(self.field, self.coeffs * int(c))

    def embed(self, N: int) -> "LinearFn":
        if N < self.n:
            raise ShrinkNotAllowed(f"cannot embed {self.n} variables into {N}")
        c = np.zeros(N, dtype=np.int64)
        c[:self.n] = self.coeffs
        return LinearFn(self.field, c)

    def project(self, n: int) -> "LinearFn | None":
        """First ``n`` coordinates, or None when the support reaches beyond them."""
        if np.any(self.coeffs[n:]):
            return None
        return LinearFn(self.field, self.coeffs[:n])

    def __eq__(self, other):
        if not isinstance(other, LinearFn):
            return NotImplemented
        return (self.field.q == other.field.q and self.n == other.n
                and bool(np.array_equal(self.coeffs, other.coeffs)))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field.q, self.coeffs.tobytes()))
        return self._hash

    def __repr__(self):
        if self.n <= 16:
            return f"LinearFn(q={self.field.q}, {self.coeffs.tolist()})"
        return f"LinearFn(q={self.field.q}, n={self.n}, terms={self.terms()})"


def eval_linear(f: LinearFn, a) -> int:
    return f(a)


def sample_sparse_linear(ctx: Field, n: int, d: int, rng: np.random.Generator) -> LinearFn:
    """Uniform element of Lin(F_q, d) on ``n`` variables."""
    if not 0 <= d <= n:
        raise BadSparsity(f"sparsity {d} not in [0, {n}]")
    c = np.zeros(n, dtype=np.int64)
    if d:
        idx = rng.choice(n, size=d, replace=False)
        c[idx] = ctx.nonzero(rng, size=d)
    return LinearFn(ctx, c)


# -- approximation band -------------------------------------------------------

def _bisect_inverse(fn, y: float, tol: float = INV_TOL) -> float:
    hi = max(1.0, y)
    while fn(hi) < y:
        hi *= 2.0
        if hi > 1e300:
            raise OutOfDomain(f"no preimage for {y}")
    lo = hi / 2.0
    while fn(lo) > y:
        lo /= 2.0
        if lo < 1e-300:
            raise OutOfDomain(f"no positive preimage for {y}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fn(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class GammaSpec:
    """A strictly increasing gamma with gamma(x) > x for x > 1.

    ``kind`` is ``affine`` (``param * x``), ``power`` (``x ** param``) or ``table``
    (piecewise-linear through ``points``, extended linearly past the ends).
    """

    kind: str
    param: float = 2.0
    points: tuple = ()
    n_cap: int | None = None

    def __post_init__(self):
        if self.kind in ("affine", "power"):
            if not self.param > 1:
                raise ValueError(f"{self.kind} gamma needs parameter > 1, got {self.param}")
        elif self.kind == "table":
            pts = tuple((float(x), float(y)) for x, y in self.points)
            object.__setattr__(self, "points", pts)
            if len(pts) < 2:
                raise ValueError("table gamma needs at least two points")
            xs = np.array([p[0] for p in pts])
            ys = np.array([p[1] for p in pts])
            if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
                raise ValueError("table gamma points must be strictly increasing")
        else:
            raise ValueError(f"unknown gamma kind {self.kind!r}")
        self._spot_check()

    def _spot_check(self):
        grid = np.geomspace(1.001, 1e4, 60)
        prev = None
        for x in grid:
            g = self.gamma(x)
            if not g > x:
                raise ValueError(f"gamma({x:g}) = {g:g} is not > x")
            if prev is not None and not g > prev:
                raise ValueError("gamma is not strictly increasing on the probe grid")
            prev = g
            if abs(self.inv(g) - x) > 1e-6:
                raise ValueError(f"gamma_inv(gamma({x:g})) drifts from x")

    def _table_eval(self, x: float) -> float:
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        if x <= xs[0]:
            j = 0
        elif x >= xs[-1]:
            j = len(xs) - 2
        else:
            return float(np.interp(x, xs, ys))
        slope = (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j])
        return ys[j] + slope * (x - xs[j])

    def gamma(self, x: float) -> float:
        if x <= 0:
            raise OutOfDomain(f"gamma undefined at {x}")
        if self.kind == "affine":
            return self.param * x
        if self.kind == "power":
            return x ** self.param
        return self._table_eval(x)

    def inv(self, y: float) -> float:
        if y <= 0:
            raise OutOfDomain(f"gamma_inv undefined at {y}")
        if self.kind == "affine":
            return y / self.param
        if self.kind == "power":
            return y ** (1.0 / self.param)
        return _bisect_inverse(self._table_eval, y)

    def big_gamma(self, x: float) -> float:
        return self.gamma(self.gamma(x))

    def delta_cap(self, x: float, n: int | None = None) -> float:
        n = self.n_cap if n is None else n
        g = self.big_gamma(x)
        return g if n is None else min(g, float(n))

    def with_cap(self, n: int) -> "GammaSpec":
        return GammaSpec(self.kind, self.param, self.points, n)

    # integer views, rounded outward
    def band(self, d: int) -> tuple[int, int]:
        """Integer outputs allowed for a gamma-approximation of sparsity ``d``."""
        if d == 0:
            return 0, 0
        return (math.ceil(self.inv(d) - EDGE_SLACK),
                math.floor(self.gamma(d) + EDGE_SLACK))

    def delta_int(self, d: int, n: int) -> int:
        if d == 0:
            return 0
        return min(math.floor(self.big_gamma(d) + EDGE_SLACK), n)

    def gamma_floor(self, x: float) -> int:
        return 0 if x == 0 else math.floor(self.gamma(x) + EDGE_SLACK)

    def max_m(self, n: int) -> float:
        """Largest admissible gap-search start, gamma^-1(gamma^-1(n))."""
        return self.inv(self.inv(n))

    def descriptor(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "table":
            d["points"] = [list(p) for p in self.points]
        else:
            d["param"] = self.param
        return d

    @classmethod
    def from_descriptor(cls, desc: dict, n_cap: int | None = None) -> "GammaSpec":
        if desc["kind"] == "table":
            return cls("table", points=tuple(tuple(p) for p in desc["points"]), n_cap=n_cap)
        return cls(desc["kind"], float(desc["param"]), n_cap=n_cap)

    @classmethod
    def parse(cls, text: str, n_cap: int | None = None) -> "GammaSpec":
        """``affine:2``, ``power:1.5`` or ``table:1,2;4,9;10,30``."""
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        if kind == "table":
            pts = tuple(tuple(float(v) for v in pair.split(",")) for pair in rest.split(";"))
            return cls("table", points=pts, n_cap=n_cap)
        return cls(kind, float(rest) if rest else 2.0, n_cap=n_cap)

    def label(self) -> str:
        if self.kind == "table":
            return "table:" + ";".join(f"{x:g},{y:g}" for x, y in self.points)
        return f"{self.kind}:{self.param:g}"


def gamma_eval(spec: GammaSpec, x: float) -> float:
    return spec.gamma(x)


def gamma_inv(spec: GammaSpec, y: float) -> float:
    return spec.inv(y)


def big_gamma(spec: GammaSpec, x: float) -> float:
    return spec.big_gamma(x)


def delta_cap(spec: GammaSpec, x: float) -> float:
    return spec.delta_cap(x)


# -- labeled examples and transforms ------------------------------------------

class LabeledExample(NamedTuple):
    a: np.ndarray
    b: object  # int for a single example, int64 array for a batch


def magnification_rate(q: int, eta_assumed: float, eta_target: float) -> float:
    """Re-randomisation probability that lifts noise ``eta_assumed`` to ``eta_target``.

    Solves ``1 - eta_target = (1 - eta_assumed)(1 - rho) + eta_assumed * rho / (q - 1)``;
    for q = 2 this is ``(eta_target - eta_assumed) / (1 - 2 eta_assumed)``.
    """
    if not (0 <= eta_assumed <= eta_target < 1 - 1 / q):
        raise BadRates(f"need 0 <= {eta_assumed} <= {eta_target} < {1 - 1 / q}")
    rho = (eta_target - eta_assumed) / ((1 - eta_assumed) - eta_assumed / (q - 1))
    if not 0 <= rho <= 1:
        raise BadRates(f"re-randomisation probability {rho} outside [0, 1]")
    return rho


def composite_noise(q: int, eta: float, rho: float) -> float:
    """Noise rate after re-randomising a label with probability ``rho``."""
    return 1 - ((1 - eta) * (1 - rho) + eta * rho / (q - 1))


def _batch(example):
    a = np.asarray(example[0], dtype=np.int64)
    b = np.asarray(example[1], dtype=np.int64)
    return a, b


def _wrap(a, b, single):
    return LabeledExample(a, int(b) if single else b)


def magnify_noise(example, eta_assumed: float, eta_target: float, ctx: Field,
                  rng: np.random.Generator) -> LabeledExample:
    rho = magnification_rate(ctx.q, eta_assumed, eta_target)
    a, b = _batch(example)
    single = b.ndim == 0
    bb = np.atleast_1d(b)
    hit = rng.random(bb.shape) < rho
    bb = np.where(hit, (bb + ctx.nonzero(rng, size=bb.shape)) % ctx.q, bb)
    return _wrap(a, bb[0] if single else bb, single)


def permute_scale_transform(example, v, phi, ctx: Field) -> LabeledExample:
    """Map ``(a, b)`` to ``((v_j^-1 a_{phi^-1(j)})_j, b)``.

    ``phi[i]`` is the image of coordinate ``i``. Examples of ``f`` become examples of
    :func:`permuted_target` ``(f, v, phi)``.
    """
    v = np.asarray(v, dtype=np.int64) % ctx.q
    if np.any(v == 0):
        raise ZeroScale("scaling vector has a zero entry")
    phi = np.asarray(phi, dtype=np.int64)
    a, b = _batch(example)
    out = np.empty_like(a)
    vinv = ctx.inv_array(v)
    out[..., phi] = (a * vinv[phi]) % ctx.q
    return _wrap(out, b, b.ndim == 0)


def permuted_target(f: LinearFn, v, phi) -> LinearFn:
    """``g(x) = sum_i lambda_i v_{phi(i)} x_{phi(i)}``."""
    v = np.asarray(v, dtype=np.int64)
    phi = np.asarray(phi, dtype=np.int64)
    c = np.zeros(f.n, dtype=np.int64)
    c[phi] = f.coeffs * v[phi]
    return LinearFn(f.field, c)


def shift_label(example, delta: LinearFn) -> LabeledExample:
    a, b = _batch(example)
    single = b.ndim == 0
    return _wrap(a, (b + delta(a)) % delta.field.q, single)


def randomize_coordinate(example, i: int, ctx: Field, rng: np.random.Generator) -> LabeledExample:
    a, b = _batch(example)
    a = a.copy()
    a[..., i] = ctx.uniform(rng, size=a[..., i].shape)
    return _wrap(a, b, b.ndim == 0)


def pad_example(example, N: int, ctx: Field, rng: np.random.Generator) -> LabeledExample:
    a, b = _batch(example)
    n = a.shape[-1]
    if N < n:
        raise ShrinkNotAllowed(f"cannot pad {n} coordinates down to {N}")
    if N == n:
        return _wrap(a, b, b.ndim == 0)
    extra = ctx.uniform(rng, size=a.shape[:-1] + (N - n,))
    return _wrap(np.concatenate([a, extra], axis=-1), b, b.ndim == 0)
