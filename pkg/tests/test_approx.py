import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lpn_sparsity import (GammaSpec, LinearFn, boost_median, brute_force_approximator,
                          cheat_band_approximator, clamp_to_delta, make_field, planted_oracle,
                          sample_sparse_linear, uniform_label_oracle)
from lpn_sparsity.approx import ApproximatorHandle, brute_force_sample_size
from lpn_sparsity.budget import boost_reps
from lpn_sparsity.errors import TooLargeToEnumerate
from lpn_sparsity.seeding import derive_seed, unit_float

G2 = GammaSpec("affine", 2.0)


def oracle_with_sparsity(n, d, q=2, seed=0, eta=0.0):
    F = make_field(q)
    f = sample_sparse_linear(F, n, d, np.random.default_rng(seed))
    return planted_oracle(f, eta, max(eta, 0.1), seed)


def test_cheat_band_edges():
    o = oracle_with_sparsity(20, 6)
    assert cheat_band_approximator(G2, "midpoint")(o, 20, 0) == 8
    assert cheat_band_approximator(G2, "low")(o, 20, 0) == 3
    assert cheat_band_approximator(G2, "high")(o, 20, 0) == 12
    assert cheat_band_approximator(G2, "exact")(o, 20, 0) == 6


def test_cheat_uniform_in_band():
    o = oracle_with_sparsity(10, 4)
    A = cheat_band_approximator(G2, "uniform")
    counts = Counter(A(o, 10, derive_seed(1, i)) for i in range(10_000))
    assert set(counts) == set(range(2, 9))
    assert all(abs(c / 10_000 - 1 / 7) <= 0.02 for c in counts.values())


def test_cheat_output_clamped_to_n():
    o = oracle_with_sparsity(8, 6)
    assert cheat_band_approximator(G2, "high")(o, 8, 0) == 8


def test_cheat_on_uniform_labels():
    o = uniform_label_oracle(make_field(2), 12, 0.1, 0)
    assert cheat_band_approximator(G2, "exact")(o, 12, 0) == 12
    assert cheat_band_approximator(G2, "exact", random_label_d=5)(o, 12, 0) == 5


@given(st.sampled_from(["affine:1.01", "affine:2", "power:1.05", "table:1,1.2;2,2.3;3,3.4"]),
       st.integers(1, 5000))
def test_band_always_contains_d(text, d):
    # gamma^-1(d) < d < gamma(d), so the band is never empty for integer d
    lo, hi = GammaSpec.parse(text).band(d)
    assert lo <= d <= hi


def test_brute_force_q_formula():
    # |C| = 1024, delta = 0.05, eta_b = 0.1, q = 2
    assert brute_force_sample_size(2, 10, 0.1, 0.05) == math.ceil(math.log(20480) / 0.16)


def test_brute_force_noiseless_exact():
    F = make_field(2)
    A = brute_force_approximator(F, 10, 0.1, 0.05)
    for s in range(10):
        d = s % 11
        o = oracle_with_sparsity(10, d, seed=s)
        assert A(o, 10, s) == d


def test_brute_force_noisy_success_rate():
    F = make_field(2)
    A = brute_force_approximator(F, 10, 0.1, 0.05)
    ok = 0
    for s in range(200):
        o = oracle_with_sparsity(10, s % 11, seed=1000 + s, eta=0.1)
        ok += A(o, 10, s) == s % 11
    assert ok >= 190


def test_brute_force_ternary():
    F = make_field(3)
    A = brute_force_approximator(F, 6, 0.1, 0.01)
    for s in range(5):
        o = oracle_with_sparsity(6, s + 1, q=3, seed=s, eta=0.1)
        assert A(o, 6, s) == s + 1


def test_brute_force_replayable():
    F = make_field(2)
    A = brute_force_approximator(F, 8, 0.3, 0.1)
    o1, o2 = oracle_with_sparsity(8, 3, seed=4, eta=0.3), oracle_with_sparsity(8, 3, seed=4, eta=0.3)
    assert A(o1, 8, 1) == A(o2, 8, 1)


def test_enumeration_guard():
    with pytest.raises(TooLargeToEnumerate):
        brute_force_approximator(make_field(2), 21, 0.1, 0.1)


def fixed(value):
    return ApproximatorHandle("fixed", lambda o, n, s: value, deterministic_given_d=True)


def test_clamp_examples():
    o = oracle_with_sparsity(20, 1)
    assert clamp_to_delta(fixed(7), G2)(o, 20, 0) == 14
    assert clamp_to_delta(fixed(15), G2)(o, 20, 0) == 20


@pytest.mark.parametrize("gamma", [G2, GammaSpec("affine", 1.5), GammaSpec("power", 1.5)])
@pytest.mark.parametrize("mode", ["low", "midpoint", "high", "exact"])
def test_clamped_cheat_obeys_delta_band(gamma, mode):
    n = 24
    A = clamp_to_delta(cheat_band_approximator(gamma, mode), gamma)
    for d in range(0, n + 1):
        o = oracle_with_sparsity(n, d, seed=d)
        D = A(o, n, 0)
        assert d <= D <= gamma.delta_int(d, n) <= n


def test_boost_reps_formula():
    assert boost_reps(1 / (2 * 10 ** 6)) == 262
    assert boost_reps(0.001) == 125


def coin(p_correct, truth=5, wrong=9):
    return ApproximatorHandle(
        "coin", lambda o, n, s: truth if unit_float(derive_seed(s, "c")) < p_correct else wrong)


def test_boost_median_deterministic():
    o = oracle_with_sparsity(10, 3)
    assert boost_median(fixed(4), 0.01)(o, 10, 0) == 4


def test_boost_median_failure_rate():
    o = oracle_with_sparsity(12, 3)
    A = boost_median(coin(2 / 3), 0.01)
    fails = sum(A(o, 12, s) != 5 for s in range(10_000))
    assert fails / 10_000 <= 0.01


def test_boost_median_twice_keeps_guarantee():
    o = oracle_with_sparsity(12, 3)
    once = boost_median(coin(2 / 3), 0.1)
    twice = boost_median(once, 0.1)
    f1 = sum(once(o, 12, s) != 5 for s in range(2000)) / 2000
    f2 = sum(twice(o, 12, s) != 5 for s in range(300)) / 300
    assert f1 <= 0.1 and f2 <= 0.1
