import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from lpn_sparsity import fe_inv, make_field, sample_nonzero, sample_uniform
from lpn_sparsity.errors import NotPrime, TooLarge, ZeroInverse
from lpn_sparsity.field import MAX_MODULUS, is_prime

SMALL_PRIMES = [2, 3, 5, 7, 11, 13]


def sieve(limit):
    flags = [True] * (limit + 1)
    flags[0] = flags[1] = False
    for i in range(2, int(limit ** 0.5) + 1):
        if flags[i]:
            flags[i * i::i] = [False] * len(flags[i * i::i])
    return flags


def test_make_field_examples():
    assert make_field(2).q == 2
    assert make_field(5).q == 5
    with pytest.raises(NotPrime):
        make_field(6)


@pytest.mark.parametrize("q", [0, 1, 4, 9, 15, 91])
def test_non_primes_rejected(q):
    with pytest.raises(NotPrime):
        make_field(q)


def test_too_large():
    with pytest.raises(TooLarge):
        make_field(MAX_MODULUS + 11)


def test_is_prime_matches_sieve():
    flags = sieve(2000)
    assert [is_prime(i) for i in range(2001)] == flags


@pytest.mark.parametrize("q,a,b", [(5, 3, 2), (2, 1, 1), (7, 4, 2)])
def test_inverse_examples(q, a, b):
    assert fe_inv(make_field(q), a) == b


def test_zero_has_no_inverse():
    with pytest.raises(ZeroInverse):
        fe_inv(make_field(5), 0)


@pytest.mark.parametrize("q", SMALL_PRIMES)
def test_field_axioms_exhaustive(q):
    F = make_field(q)
    els = range(q)
    for a, b in itertools.product(els, els):
        assert F.add(a, b) == F.add(b, a)
        assert F.mul(a, b) == F.mul(b, a)
        assert F.add(F.sub(a, b), b) == a
        assert F.add(a, F.neg(a)) == 0
    for a, b, c in itertools.product(els, els, els):
        assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))


@pytest.mark.parametrize("q", SMALL_PRIMES)
def test_double_inverse_exhaustive(q):
    F = make_field(q)
    for a in range(1, q):
        assert F.mul(a, fe_inv(F, a)) == 1
        assert fe_inv(F, fe_inv(F, a)) == a


@pytest.mark.parametrize("q", [3, 5, 7, 13, 65537])
def test_inv_array_matches_scalar(q):
    F = make_field(q)
    a = np.arange(1, min(q, 500))
    assert F.inv_array(a).tolist() == [F.inv(int(x)) for x in a]


@given(st.sampled_from([2, 3, 5, 7, 2 ** 31 - 1]), st.integers(), st.integers())
def test_reduce_is_canonical(q, a, b):
    F = make_field(q)
    s = F.add(a, b)
    assert 0 <= s < q and s == (a + b) % q


@given(st.sampled_from([3, 5, 7, 101, 2 ** 31 - 1]), st.integers(min_value=1))
def test_inverse_property(q, a):
    F = make_field(q)
    a = a % q or 1
    assert (a * fe_inv(F, a)) % q == 1


def test_uniform_binary_histogram():
    F = make_field(2)
    x = F.uniform(np.random.default_rng(1), size=100_000)
    freq = np.bincount(x, minlength=2) / x.size
    assert np.all(np.abs(freq - 0.5) <= 0.01)
    assert stats.chisquare(np.bincount(x)).pvalue > 0.001


def test_nonzero_never_zero():
    x = make_field(5).nonzero(np.random.default_rng(2), size=100_000)
    assert x.min() >= 1 and x.max() <= 4


def test_nonzero_ternary_histogram():
    x = make_field(3).nonzero(np.random.default_rng(3), size=100_000)
    freq = np.bincount(x, minlength=3)[1:] / x.size
    assert np.all(np.abs(freq - 0.5) <= 0.01)


def test_scalar_samplers():
    F = make_field(7)
    rng = np.random.default_rng(4)
    vals = [sample_uniform(F, rng) for _ in range(2000)]
    nz = [sample_nonzero(F, rng) for _ in range(2000)]
    assert set(vals) == set(range(7))
    assert set(nz) == set(range(1, 7))
    assert all(isinstance(v, int) for v in vals + nz)


def test_large_modulus_dot_does_not_overflow():
    q = 2 ** 31 - 1
    F = make_field(q)
    a = np.full((3, 50), q - 1, dtype=np.int64)
    c = np.full(50, q - 1, dtype=np.int64)
    assert F.dot(a, c).tolist() == [(50 * (q - 1) ** 2) % q] * 3
