"""Seeded noisy example oracles with stackable stream transforms.

A simulated oracle's stream is a pure function of its seed and the example index:
raw examples are produced in fixed-size blocks, block ``j`` drawing from its own
derived generator, so the same seed gives the same examples however the caller
batches its requests.

Child oracles (``spawn``) share the parent's source but get a derived seed and an
extended transform stack. Sources count every example handed to a learner, shared
across all children, which is what the harness reports as "examples used".
"""

from __future__ import annotations

import numpy as np

from . import budget
from .errors import BudgetExceeded, DimensionMismatch, SealedTarget
from .field import Field
from .linmodel import (LabeledExample, LinearFn, composite_noise, magnification_rate,
                       magnify_noise, pad_example, permute_scale_transform,
                       randomize_coordinate)
from .seeding import derive_seed, make_rng

BLOCK = 64


# -- transforms -----------------------------------------------------------------

class Transform:
    """One stage of an example stream rewrite.

    Besides rewriting batches, each transform says what it does to the hidden
    target (``map_terms``) and to the noise rate, which lets test-only
    approximators read the effective target of a derived stream.
    """

    preserves_sparsity = False

    def apply(self, a, b, field: Field, rng):
        raise NotImplementedError

    def map_terms(self, terms, n, field):
        return terms

    def map_noise(self, eta, q):
        return eta

    def out_dim(self, n):
        return n


class MagnifyNoise(Transform):
    preserves_sparsity = True

    def __init__(self, eta_assumed: float, eta_target: float):
        self.eta_assumed = eta_assumed
        self.eta_target = eta_target

    def apply(self, a, b, field, rng):
        return magnify_noise((a, b), self.eta_assumed, self.eta_target, field, rng)

    def map_noise(self, eta, q):
        return composite_noise(q, eta, magnification_rate(q, self.eta_assumed, self.eta_target))


class PermuteScale(Transform):
    """Random coordinate permutation plus nonzero rescaling.

    Either give ``v`` and ``phi`` explicitly or a ``seed``; seeded parameters are
    only materialised when a batch is rewritten or the target is mapped.
    """

    preserves_sparsity = True

    def __init__(self, v=None, phi=None, seed: int | None = None):
        if (v is None) != (phi is None) or (v is None and seed is None):
            raise ValueError("give both v and phi, or a seed")
        self._v = None if v is None else np.asarray(v, dtype=np.int64)
        self._phi = None if phi is None else np.asarray(phi, dtype=np.int64)
        self.seed = seed

    def params(self, n: int, field: Field):
        if self._phi is None:
            rng = make_rng(self.seed)
            self._phi = rng.permutation(n)
            # F_2 \ {0} = {1}
            self._v = (np.ones(n, dtype=np.int64) if field.q == 2
                       else field.nonzero(rng, size=n))
        return self._v, self._phi

    def apply(self, a, b, field, rng):
        v, phi = self.params(a.shape[-1], field)
        return permute_scale_transform((a, b), v, phi, field)

    def map_terms(self, terms, n, field):
        if terms is None:
            return None
        v, phi = self.params(n, field)
        return {int(phi[i]): (c * int(v[phi[i]])) % field.q for i, c in terms.items()}


class ShiftLabel(Transform):
    """Add ``delta(a)`` to every label; ``delta`` is given by its nonzero terms."""

    def __init__(self, delta):
        if isinstance(delta, LinearFn):
            delta = delta.terms()
        self.terms = {int(i): int(c) for i, c in delta.items() if c}
        self._idx = np.array(sorted(self.terms), dtype=np.int64)
        self._coef = np.array([self.terms[i] for i in self._idx.tolist()], dtype=np.int64)

    def apply(self, a, b, field, rng):
        if not self.terms:
            return a, b
        return a, (b + (a[:, self._idx] * self._coef).sum(axis=1)) % field.q

    def map_terms(self, terms, n, field):
        if terms is None:
            return None
        out = dict(terms)
        for i, c in self.terms.items():
            v = (out.get(i, 0) + c) % field.q
            if v:
                out[i] = v
            else:
                out.pop(i, None)
        return out


class RandomizeCoordinate(Transform):
    def __init__(self, i: int):
        self.i = int(i)

    def apply(self, a, b, field, rng):
        return randomize_coordinate((a, b), self.i, field, rng)

    def map_terms(self, terms, n, field):
        if terms is None or self.i in terms:
            # labels no longer depend on the visible a
            return None
        return terms


class Pad(Transform):
    preserves_sparsity = True

    def __init__(self, N: int):
        self.N = int(N)

    def apply(self, a, b, field, rng):
        return pad_example((a, b), self.N, field, rng)

    def out_dim(self, n):
        return self.N


# -- sources ------------------------------------------------------------------------

class PlantedSource:
    """Simulated random classification noise around a hidden linear target."""

    blocked = True

    def __init__(self, target: LinearFn, eta: float):
        q = target.field.q
        if not 0 <= eta < 1 - 1 / q:
            raise ValueError(f"noise rate {eta} outside [0, {1 - 1 / q})")
        self.target = target
        self.eta = eta
        self.consumed = 0

    @property
    def field(self):
        return self.target.field

    @property
    def n(self):
        return self.target.n

    def raw(self, m: int, rng):
        f, q = self.target, self.field.q
        a = self.field.uniform(rng, size=(m, f.n))
        b = f(a)
        wrong = rng.random(m) < self.eta
        b = np.where(wrong, (b + self.field.nonzero(rng, size=m)) % q, b)
        return a, b

    def state(self):
        return self.target.terms(), self.eta

    def sparsity(self):
        return self.target.sparsity


class UniformLabelSource:
    """Uniform examples with uniform labels (no target at all)."""

    blocked = True

    def __init__(self, field: Field, n: int):
        self.field = field
        self.n = n
        self.consumed = 0

    def raw(self, m, rng):
        return (self.field.uniform(rng, size=(m, self.n)),
                self.field.uniform(rng, size=m))

    def state(self):
        return None, None

    def sparsity(self):
        return None


class ReplaySource:
    """Pre-drawn examples consumed in order; the target, if any, stays sealed
    unless given explicitly (open instances)."""

    blocked = False

    def __init__(self, field: Field, a, b, target: LinearFn | None = None,
                 eta: float | None = None):
        self.field = field
        self.a = np.asarray(a, dtype=np.int64).reshape(len(b), -1)
        self.b = np.asarray(b, dtype=np.int64)
        self.n = self.a.shape[1]
        self.target = target
        self.eta = eta
        self.cursor = 0
        self.consumed = 0

    def take(self, m):
        if self.cursor + m > len(self.b):
            raise BudgetExceeded(
                f"pre-drawn example pool exhausted ({len(self.b)} examples)")
        s = slice(self.cursor, self.cursor + m)
        self.cursor += m
        return self.a[s].copy(), self.b[s].copy()

    def state(self):
        if self.target is None:
            raise SealedTarget("replayed stream has no visible target")
        return self.target.terms(), self.eta

    def sparsity(self):
        if self.target is None:
            raise SealedTarget("replayed stream has no visible target")
        return self.target.sparsity


# -- oracle -----------------------------------------------------------------------

class ExampleOracle:
    """Labeled-example access for learners.

    ``eta_bound`` is public knowledge; the source, and so the hidden target, is not
    meant to be read by learners (see ``peek_*``).
    """

    def __init__(self, source, seed: int, eta_bound: float, transforms=(), block: int = BLOCK):
        self.source = source
        self.seed = int(seed)
        self.eta_bound = float(eta_bound)
        self.transforms = tuple(transforms)
        self.block = block
        self.draw_counter = 0
        self._buf = None
        self._next_block = 0
        n = source.n
        for t in self.transforms:
            n = t.out_dim(n)
        self.n = n

    @property
    def field(self) -> Field:
        return self.source.field

    @property
    def examples_used(self) -> int:
        return self.source.consumed

    def spawn(self, *label, transforms=()) -> "ExampleOracle":
        return ExampleOracle(self.source, derive_seed(self.seed, *label), self.eta_bound,
                             self.transforms + tuple(transforms), self.block)

    def _apply(self, a, b, tag):
        for t_idx, t in enumerate(self.transforms):
            a, b = t.apply(a, b, self.field, make_rng(derive_seed(self.seed, "xf", t_idx, tag)))
        return np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)

    def _fill(self, m):
        parts = [] if self._buf is None else [self._buf]
        have = 0 if self._buf is None else len(self._buf[1])
        while have < m:
            j = self._next_block
            self._next_block += 1
            a, b = self.source.raw(self.block, make_rng(derive_seed(self.seed, "raw", j)))
            parts.append(self._apply(a, b, j))
            have += self.block
        self._buf = (np.concatenate([p[0] for p in parts]),
                     np.concatenate([p[1] for p in parts]))

    def draw(self, m: int):
        """Next ``m`` examples as ``(A, b)`` with ``A`` of shape ``(m, n)``."""
        m = int(m)
        budget.charge_examples(m)
        if self.source.blocked:
            self._fill(m)
            a, b = self._buf[0][:m], self._buf[1][:m]
            self._buf = (self._buf[0][m:], self._buf[1][m:])
        else:
            a, b = self.source.take(m)
            a, b = self._apply(a, b, ("d", self.draw_counter))
        self.draw_counter += m
        self.source.consumed += m
        return a, b

    def next(self) -> LabeledExample:
        a, b = self.draw(1)
        return LabeledExample(a[0], int(b[0]))

    # -- test-only views of the hidden target --------------------------------
    def peek_state(self):
        """(terms of the effective target or None for uniform labels, noise rate)."""
        terms, eta = self.source.state()
        n = self.source.n
        for t in self.transforms:
            if terms is not None:
                terms = t.map_terms(terms, n, self.field)
                eta = t.map_noise(eta, self.field.q)
            n = t.out_dim(n)
        return terms, eta

    def peek_sparsity(self):
        """Sparsity of the effective target, or None when labels are uniform."""
        last = -1
        for i, t in enumerate(self.transforms):
            if not t.preserves_sparsity:
                last = i
        if last < 0:
            return self.source.sparsity()
        terms, _ = self.source.state()
        n = self.source.n
        for t in self.transforms[:last + 1]:
            if terms is None:
                return None
            terms = t.map_terms(terms, n, self.field)
            n = t.out_dim(n)
        return None if terms is None else len(terms)

    def peek_target(self) -> LinearFn | None:
        terms, _ = self.peek_state()
        if terms is None:
            return None
        return LinearFn.from_terms(self.field, self.n, terms)


def oracle_next(oracle: ExampleOracle) -> LabeledExample:
    return oracle.next()


def planted_oracle(target: LinearFn, eta: float, eta_bound: float, seed: int) -> ExampleOracle:
    if eta > eta_bound + 1e-12:
        raise ValueError(f"true noise {eta} exceeds the bound {eta_bound}")
    return ExampleOracle(PlantedSource(target, eta), seed, eta_bound)


def uniform_label_oracle(field: Field, n: int, eta_bound: float, seed: int) -> ExampleOracle:
    return ExampleOracle(UniformLabelSource(field, n), seed, eta_bound)


def check_dim(oracle: ExampleOracle, n: int):
    if oracle.n != n:
        raise DimensionMismatch(f"oracle has dimension {oracle.n}, expected {n}")
