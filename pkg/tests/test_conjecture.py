from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logpot.conjecture import (InertiaSpec, Verdict, dbs_hierarchy_trial, inertia_closed_form,
                               inertia_inequality_trial, inertia_moment_mc, make_rng,
                               permutation_invariance_check, simplex_sample)
from logpot.dbs import moment_inequalities
from logpot.errors import CapacityError, ConfigurationError
from logpot.potential import ChargeConfiguration, solve_equilibria
from oracles import random_config, random_points, regular_polygon


def test_simplex_sample_on_simplex():
    t = simplex_sample(5, make_rng(0), 1000)
    assert t.shape == (1000, 5)
    assert np.all(t >= 0)
    assert np.abs(t.sum(axis=1) - 1).max() < 1e-15
    assert simplex_sample(1, make_rng(0)).tolist() == [1.0]


def test_simplex_sample_moments():
    # uniform simplex: E t_i = 1/k, E t_i^2 = 2/(k(k+1))
    k = 4
    t = simplex_sample(k, make_rng(1), 200_000)
    assert np.abs(t.mean(axis=0) - 1 / k).max() < 3e-3
    assert np.abs((t ** 2).mean(axis=0) - 2 / (k * (k + 1))).max() < 2e-3


def test_inertia_spec_validation():
    with pytest.raises(ConfigurationError):
        InertiaSpec(direction=(1.0, 1.0, 0.0))
    with pytest.raises(ConfigurationError):
        InertiaSpec(alpha=0.5)
    assert InertiaSpec().moments([3 + 4j])[0] == pytest.approx(25.0)


def test_closed_form_single_vertex():
    assert inertia_closed_form([1 + 1j], InertiaSpec()) == pytest.approx(2.0)


def test_closed_form_segment_quadrature():
    # degree-2 integrand, so 3-point Gauss-Legendre is exact
    spec = InertiaSpec(point=(0.3, -0.2, 1.0), direction=(0.6, 0.0, 0.8))
    v = np.array([1 + 2j, -0.5 + 0.1j])
    x, wts = np.polynomial.legendre.leggauss(3)
    s = (x + 1) / 2
    exact = float((spec.moments(s * v[0] + (1 - s) * v[1]) * wts / 2).sum())
    assert inertia_closed_form(v, spec) == pytest.approx(exact, rel=1e-13)


def test_mc_matches_closed_form():
    rng = np.random.default_rng(0)
    for i in range(10):
        v = random_points(rng, int(rng.integers(2, 7)))
        d = rng.normal(size=3)
        spec = InertiaSpec(point=tuple(rng.normal(size=3)), direction=tuple(d / np.linalg.norm(d)))
        est, se = inertia_moment_mc(v, spec, 20_000, seed=i)
        assert abs(est - inertia_closed_form(v, spec)) < 4 * se


def test_mc_trials_floor():
    with pytest.raises(ConfigurationError):
        inertia_moment_mc([0, 1], InertiaSpec(), 10)


def test_mc_threads_are_bitwise_identical():
    v = regular_polygon(5)
    a = inertia_moment_mc(v, InertiaSpec(), 50_000, seed=3, threads=1)
    b = inertia_moment_mc(v, InertiaSpec(), 50_000, seed=3, threads=4)
    assert a == b


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_permutation_invariance(seed):
    v = random_points(np.random.default_rng(seed), 5)
    assert permutation_invariance_check(v, InertiaSpec(alpha=3.0), 2000, seed % 1000) <= 1e-12


# hierarchy trials

def test_hierarchy_trial_ones_matches_moment_margin():
    # with t = 1 each permutation contributes the same term
    rng = np.random.default_rng(1)
    c = random_config(rng, 5)
    eq = solve_equilibria(c)
    for k in range(1, 5):
        for m in range(1, k + 1):
            trial = dbs_hierarchy_trial(c, eq, k, m)
            factorial_k = np.prod(np.arange(1, k + 1))
            assert trial == pytest.approx(factorial_k * moment_inequalities(c, eq, k, m, 1.0), abs=1e-10)


def test_hierarchy_trial_ones_never_negative():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        c = random_config(rng, n)
        k = int(rng.integers(1, n))
        m = int(rng.integers(1, k + 1))
        assert dbs_hierarchy_trial(c, None, k, m) >= -1e-9


def test_hierarchy_trial_validation():
    c = ChargeConfiguration(regular_polygon(4), np.ones(4))
    with pytest.raises(ConfigurationError):
        dbs_hierarchy_trial(c, None, 4, 1)
    with pytest.raises(ConfigurationError):
        dbs_hierarchy_trial(c, None, 2, 1, t=[1, 2, 3])
    big = ChargeConfiguration(np.arange(12) * (1 + 0.5j), np.ones(12))
    assert comb(12, 9) * 362880 > 1e6
    with pytest.raises(CapacityError):
        dbs_hierarchy_trial(big, np.zeros(11), 9, 1)


def test_inertia_trial_report():
    rng = np.random.default_rng(3)
    c = random_config(rng, 5)
    rep = inertia_inequality_trial(c, None, 2, trials=20_000, seed=4)
    assert rep.lhs_se > 0 and rep.rhs_se > 0
    assert rep.verdict in (Verdict.CONSISTENT, Verdict.VIOLATION_CANDIDATE)
    again = inertia_inequality_trial(c, None, 2, trials=20_000, seed=4, threads=2)
    assert rep == again


def test_inertia_trial_level_one_closed_form():
    # level 1 has no simplex randomness: both sides are exact
    c = ChargeConfiguration([0, 1, 2j], [1, 2, 3])
    rep = inertia_inequality_trial(c, None, 1, trials=10_000)
    assert rep.lhs_se == pytest.approx(0, abs=1e-9)
    w = solve_equilibria(c).points
    a = c.charges / c.charges.sum()
    assert rep.lhs_estimate == pytest.approx((np.abs(w) ** 2).sum())
    assert rep.rhs_estimate == pytest.approx(((1 - a) * np.abs(c.points) ** 2).sum())


def test_inertia_trial_guards():
    c = random_config(np.random.default_rng(5), 4)
    with pytest.raises(ConfigurationError):
        inertia_inequality_trial(c, None, 1, trials=100)
    with pytest.raises(ConfigurationError):
        inertia_inequality_trial(c, None, 4)
