import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpn_sparsity import (GammaSpec, LinearFn, big_gamma, delta_cap, eval_linear, gamma_eval,
                          gamma_inv, magnify_noise, make_field, pad_example,
                          permute_scale_transform, randomize_coordinate, sample_sparse_linear,
                          shift_label)
from lpn_sparsity.errors import (BadRates, BadSparsity, DimensionMismatch, OutOfDomain,
                                 ShrinkNotAllowed, ZeroScale)
from lpn_sparsity.linmodel import composite_noise, magnification_rate, permuted_target


def lf(q, coeffs):
    return LinearFn(make_field(q), coeffs)


# -- LinearFn and eval ---------------------------------------------------------------

def test_eval_examples():
    assert eval_linear(lf(2, [1, 0, 1, 0]), [1, 0, 1, 0]) == 0
    assert eval_linear(lf(2, [0, 0, 0]), [1, 1, 0]) == 0
    assert eval_linear(lf(5, [2, 3]), [4, 1]) == 1


def test_eval_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        eval_linear(lf(2, [1, 1]), [1, 0, 1])


def test_sparsity_and_support():
    f = lf(3, [0, 2, 0, 1])
    assert f.sparsity == 2
    assert f.support.tolist() == [1, 3]
    assert f.terms() == {1: 2, 3: 1}


def test_empty_function_rejected():
    with pytest.raises(DimensionMismatch):
        lf(2, [])


def test_coefficients_read_only():
    f = lf(5, [1, 2])
    with pytest.raises(ValueError):
        f.coeffs[0] = 3


def test_embed_and_project():
    f = lf(3, [1, 0, 2])
    g = f.embed(6)
    assert g.coeffs.tolist() == [1, 0, 2, 0, 0, 0]
    assert g.project(3) == f
    assert lf(3, [1, 0, 0, 2]).project(3) is None


@given(st.sampled_from([2, 3, 5]), st.lists(st.integers(0, 10), min_size=1, max_size=6),
       st.data())
def test_arithmetic_matches_pointwise_eval(q, c1, data):
    n = len(c1)
    c2 = data.draw(st.lists(st.integers(0, 10), min_size=n, max_size=n))
    a = data.draw(st.lists(st.integers(0, q - 1), min_size=n, max_size=n))
    f, g = lf(q, c1), lf(q, c2)
    assert (f + g)(a) == (f(a) + g(a)) % q
    assert (f - g)(a) == (f(a) - g(a)) % q
    assert f.scale(2)(a) == (2 * f(a)) % q


# -- sampling ------------------------------------------------------------------------

def test_only_full_parity_on_five_variables():
    f = sample_sparse_linear(make_field(2), 5, 5, np.random.default_rng(0))
    assert f.coeffs.tolist() == [1] * 5


def test_bad_sparsity():
    with pytest.raises(BadSparsity):
        sample_sparse_linear(make_field(2), 3, 4, np.random.default_rng(0))


def test_supports_uniform_binary():
    F, rng = make_field(2), np.random.default_rng(1)
    counts = Counter(tuple(sample_sparse_linear(F, 4, 2, rng).support) for _ in range(100_000))
    assert len(counts) == 6
    assert all(abs(c / 100_000 - 1 / 6) <= 0.01 for c in counts.values())


def test_one_sparse_ternary_uniform():
    F, rng = make_field(3), np.random.default_rng(2)
    counts = Counter(tuple(sample_sparse_linear(F, 3, 1, rng).coeffs) for _ in range(60_000))
    assert len(counts) == 6
    assert all(abs(c / 60_000 - 1 / 6) <= 0.01 for c in counts.values())


@given(st.sampled_from([2, 3, 7]), st.integers(1, 12), st.data())
def test_sampled_sparsity_exact(q, n, data):
    d = data.draw(st.integers(0, n))
    seed = data.draw(st.integers(0, 2 ** 32))
    f = sample_sparse_linear(make_field(q), n, d, np.random.default_rng(seed))
    assert f.n == n and f.sparsity == d


# -- gamma ---------------------------------------------------------------------------

def test_gamma_affine_examples():
    g = GammaSpec("affine", 2.0)
    assert gamma_eval(g, 5) == 10
    assert gamma_inv(g, 10) == 5
    assert big_gamma(g, 5) == 20
    assert delta_cap(g.with_cap(12), 5) == 12


def test_gamma_power_inverse():
    g = GammaSpec("power", 2.0)
    assert abs(gamma_inv(g, 16) - 4) <= 1e-9


def test_table_gamma_bisection_inverse():
    g = GammaSpec("table", points=((1, 2), (4, 9), (10, 30)))
    for x in (1.5, 3.0, 7.0, 50.0):
        assert abs(g.inv(g.gamma(x)) - x) <= 1e-6


@pytest.mark.parametrize("bad", [("affine", 1.0), ("power", 0.5), ("cubic", 2.0)])
def test_bad_gamma_rejected(bad):
    with pytest.raises(ValueError):
        GammaSpec(*bad)


def test_table_gamma_below_identity_rejected():
    with pytest.raises(ValueError):
        GammaSpec("table", points=((1, 0.5), (2, 1.0)))


def test_gamma_domain():
    with pytest.raises(OutOfDomain):
        GammaSpec("affine", 2.0).gamma(0)


@given(st.sampled_from(["affine:1.5", "affine:3", "power:1.3", "table:1,2;4,9;10,30"]),
       st.floats(1.001, 1e4))
def test_gamma_round_trip(text, x):
    g = GammaSpec.parse(text)
    assert g.gamma(x) > x
    assert abs(g.inv(g.gamma(x)) - x) <= 1e-6 * max(1, x)


def test_band_and_parse_label():
    g = GammaSpec.parse("affine:2")
    assert g.band(6) == (3, 12)
    assert g.band(0) == (0, 0)
    assert GammaSpec.parse(g.label()) == g


# -- magnification -------------------------------------------------------------------

def test_binary_magnification_rate():
    assert magnification_rate(2, 0.1, 0.2) == pytest.approx(0.125, abs=1e-15)
    assert magnification_rate(2, 0.3, 0.3) == 0


def test_ternary_magnification_rate():
    rho = magnification_rate(3, 0.2, 0.5)
    assert rho == pytest.approx(0.3 / 0.7, abs=1e-12)
    assert composite_noise(3, 0.2, rho) == pytest.approx(0.5, abs=1e-12)


@given(st.sampled_from([2, 3, 5, 7]), st.floats(0, 1), st.floats(0, 1))
def test_magnification_hits_target(q, u, v):
    top = (1 - 1 / q) * 0.999
    lo, hi = sorted((u * top, v * top))
    rho = magnification_rate(q, lo, hi)
    assert 0 <= rho <= 1
    assert composite_noise(q, lo, rho) == pytest.approx(hi, abs=1e-9)


def test_magnification_bad_rates():
    with pytest.raises(BadRates):
        magnification_rate(2, 0.3, 0.2)
    with pytest.raises(BadRates):
        magnification_rate(2, 0.1, 0.5)


def test_magnify_single_example_keeps_type():
    F = make_field(2)
    ex = magnify_noise((np.array([1, 0]), 1), 0.0, 0.0, F, np.random.default_rng(0))
    assert ex.b == 1 and isinstance(ex.b, int)


# -- permute and scale ---------------------------------------------------------------

def test_permute_identity():
    F = make_field(5)
    a = np.array([1, 2, 3, 4])
    ex = permute_scale_transform((a, 3), [1, 1, 1, 1], [0, 1, 2, 3], F)
    assert ex.a.tolist() == a.tolist() and ex.b == 3


def test_permute_swap_binary():
    F = make_field(2)
    f = lf(2, [1, 0, 0])
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = F.uniform(rng, size=3)
        ex = permute_scale_transform((a, f(a)), [1, 1, 1], [1, 0, 2], F)
        assert ex.b == ex.a[1]


def test_permute_scale_q5_exhaustive():
    F = make_field(5)
    f = lf(5, [2, 0])
    v, phi = [3, 1], [0, 1]
    for a in itertools.product(range(5), repeat=2):
        ex = permute_scale_transform((np.array(a), f(np.array(a))), v, phi, F)
        assert ex.b == ex.a[0]  # 2 * 3 = 6 = 1 mod 5


def test_zero_scale_rejected():
    with pytest.raises(ZeroScale):
        permute_scale_transform((np.array([1, 2]), 0), [0, 1], [0, 1], make_field(3))


@settings(max_examples=60)
@given(st.sampled_from([2, 3, 5, 7]), st.integers(1, 8), st.integers(0, 2 ** 32))
def test_permute_scale_consistency(q, n, seed):
    F = make_field(q)
    rng = np.random.default_rng(seed)
    f = LinearFn(F, F.uniform(rng, size=n))
    v, phi = F.nonzero(rng, size=n), rng.permutation(n)
    g = permuted_target(f, v, phi)
    a = F.uniform(rng, size=(40, n))
    ex = permute_scale_transform((a, f(a)), v, phi, F)
    assert np.array_equal(g(ex.a), ex.b)
    assert g.sparsity == f.sparsity


# -- shift, randomize, pad -----------------------------------------------------------

def test_shift_examples():
    F = make_field(2)
    a = np.array([[1, 1], [1, 0], [0, 1], [0, 0]])
    f = lf(2, [1, 1])
    ex = shift_label((a, f(a)), lf(2, [0, 1]))
    assert np.array_equal(ex.b, a[:, 0])
    same = shift_label((a, f(a)), lf(2, [0, 0]))
    assert np.array_equal(same.b, f(a))


def test_shift_q5_exhaustive():
    a = np.array(list(itertools.product(range(5), repeat=2)))
    f = lf(5, [2, 0])
    ex = shift_label((a, f(a)), lf(5, [-2, 1]))
    assert np.array_equal(ex.b, a[:, 1])


def test_shift_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        shift_label((np.array([1, 0, 1]), 0), lf(2, [1, 1]))


@pytest.mark.parametrize("q", [2, 3])
def test_shift_composition_exhaustive(q):
    n = 2 if q == 3 else 3
    fns = [lf(q, c) for c in itertools.product(range(q), repeat=n)]
    a = np.array(list(itertools.product(range(q), repeat=n)))
    for b0 in range(q):
        b = np.full(len(a), b0)
        for d1 in fns:
            for d2 in fns:
                lhs = shift_label(shift_label((a, b), d1), d2)
                rhs = shift_label((a, b), d1 + d2)
                assert np.array_equal(lhs.b, rhs.b)


def test_randomize_relevant_binary():
    F = make_field(2)
    rng = np.random.default_rng(5)
    a = F.uniform(rng, size=(100_000, 3))
    ex = randomize_coordinate((a, a[:, 0].copy()), 0, F, rng)
    assert abs(np.mean(ex.b == ex.a[:, 0]) - 0.5) <= 0.01


def test_randomize_is_deterministic():
    F = make_field(3)
    a = F.uniform(np.random.default_rng(0), size=(20, 4))
    e1 = randomize_coordinate((a, a[:, 0]), 2, F, np.random.default_rng(9))
    e2 = randomize_coordinate((a, a[:, 0]), 2, F, np.random.default_rng(9))
    assert np.array_equal(e1.a, e2.a)
    assert np.array_equal(np.delete(e1.a, 2, axis=1), np.delete(a, 2, axis=1))


def test_pad_examples():
    F = make_field(2)
    rng = np.random.default_rng(6)
    a = F.uniform(rng, size=(100_000, 4))
    f = lf(2, [1, 0, 1, 1])
    ex = pad_example((a, f(a)), 6, F, rng)
    assert ex.a.shape == (100_000, 6)
    assert np.all(np.abs(ex.a[:, 4:].mean(axis=0) - 0.5) <= 0.01)
    assert np.array_equal(f.embed(6)(ex.a), ex.b)
    same = pad_example((a, f(a)), 4, F, rng)
    assert np.array_equal(same.a, a)
    with pytest.raises(ShrinkNotAllowed):
        pad_example((a, f(a)), 3, F, rng)
