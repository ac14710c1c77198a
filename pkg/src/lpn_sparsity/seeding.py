"""Seed derivation.

Every random choice in the package is keyed by ``derive_seed(master, label, index...)``
so results do not depend on call order between independent tasks.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(master: int, *labels) -> int:
    """64-bit seed from a master seed and a path of labels/indices."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master) & _MASK64).encode())
    for lab in labels:
        h.update(b"\x1f")
        h.update(str(lab).encode())
    return int.from_bytes(h.digest(), "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))


def unit_float(seed: int) -> float:
    """Map a derived seed to [0, 1); derived seeds are uniform 64-bit values."""
    return (int(seed) & _MASK64) / 2.0**64
