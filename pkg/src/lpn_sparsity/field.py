"""Prime-field arithmetic.

Elements are plain integers in ``[0, q-1]``; vectors are int64 numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NotPrime, TooLarge, ZeroInverse

# products of two reduced elements must fit in int64
MAX_MODULUS = 1 << 31


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class Field:
    q: int

    def __post_init__(self):
        if self.q >= MAX_MODULUS:
            raise TooLarge(f"modulus {self.q} exceeds {MAX_MODULUS - 1}")
        if not is_prime(self.q):
            raise NotPrime(f"{self.q} is not prime")

    @property
    def is_binary(self) -> bool:
        return self.q == 2

    def reduce(self, x):
        return np.mod(x, self.q)

    def add(self, a, b):
        return (a + b) % self.q

    def sub(self, a, b):
        return (a - b) % self.q

    def mul(self, a, b):
        return (a * b) % self.q

    def neg(self, a):
        return (-a) % self.q

    def inv(self, a: int) -> int:
        a = int(a) % self.q
        if a == 0:
            raise ZeroInverse("0 has no inverse")
        return pow(a, self.q - 2, self.q)

    @cached_property
    def inv_table(self) -> np.ndarray | None:
        if self.q > 1 << 16:
            return None
        t = np.zeros(self.q, dtype=np.int64)
        for a in range(1, self.q):
            t[a] = pow(a, self.q - 2, self.q)
        return t

    def inv_array(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64) % self.q
        if np.any(a == 0):
            raise ZeroInverse("0 has no inverse")
        table = self.inv_table
        if table is not None:
            return table[a]
        return np.array([pow(int(x), self.q - 2, self.q) for x in a.ravel()],
                        dtype=np.int64).reshape(a.shape)

    def dot(self, a: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        """Row-wise inner product of ``a`` (vector or matrix) with ``coeffs``."""
        if self.q <= 1 << 16 and a.shape[-1] < 1 << 30:
            # each product < 2^32, the sum stays far below 2^63
            return (a @ coeffs) % self.q
        return ((a * coeffs) % self.q).sum(axis=-1) % self.q

    def uniform(self, rng: np.random.Generator, size=None):
        return rng.integers(0, self.q, size=size, dtype=np.int64)

    def nonzero(self, rng: np.random.Generator, size=None):
        return rng.integers(1, self.q, size=size, dtype=np.int64)


def make_field(q: int) -> Field:
    return Field(int(q))


def fe_inv(ctx: Field, a: int) -> int:
    return ctx.inv(a)


def sample_uniform(ctx: Field, rng: np.random.Generator) -> int:
    return int(ctx.uniform(rng))


def sample_nonzero(ctx: Field, rng: np.random.Generator) -> int:
    return int(ctx.nonzero(rng))
