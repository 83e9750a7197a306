import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logpot.errors import ConfigurationError
from logpot.majorization import (ConvexFunction, PiecewiseLinearConvex, Verdict, WeightedTuple,
                                 _phase_one, check_weighted_majorization, choquet_compare,
                                 convex_battery, make_certificate, verify_certificate)
from logpot.potential import ChargeConfiguration, normalize, solve_equilibria
from oracles import random_config, random_points, regular_polygon


def feasible_instance(rng, m, n):
    """x = R y with a random row-stochastic R and b = a R."""
    y = random_points(rng, n)
    r = rng.dirichlet(np.full(n, 0.7), size=m)
    a = rng.dirichlet(np.ones(m))
    b = a @ r
    return WeightedTuple(r @ y, a), WeightedTuple(y, b / b.sum()), r


def infeasible_instance(rng, m, n):
    """Some x lies outside the convex hull of y, which no mixing can reach."""
    y = random_points(rng, n)
    x = random_points(rng, m, 0.5)
    x[0] = 1.5 * np.exp(2j * np.pi * rng.uniform())
    return WeightedTuple(x, rng.dirichlet(np.ones(m))), WeightedTuple(y, rng.dirichlet(np.ones(n)))


def equilibrium_pair(c):
    c = normalize(c)
    n = c.n
    w = solve_equilibria(c).points
    return WeightedTuple(w, np.full(n - 1, 1 / (n - 1))), WeightedTuple(c.points, (1 - c.charges) / (n - 1))


# weighted tuples

def test_weighted_tuple_validation():
    with pytest.raises(ConfigurationError):
        WeightedTuple([0, 1], [0.5, 0.6])
    with pytest.raises(ConfigurationError):
        WeightedTuple([0, 1], [1.0, 0.0])
    with pytest.raises(ConfigurationError):
        WeightedTuple([0, 1], [1.0])
    t = WeightedTuple([1 + 2j], [1.0])
    assert t.vectors.tolist() == [[1.0, 2.0]]
    assert t.dim == 2


def test_weighted_tuple_general_dimension():
    t = WeightedTuple(np.eye(3), np.full(3, 1 / 3))
    assert t.dim == 3
    assert np.allclose(t.barycenter, 1 / 3)


# LP core

def test_phase_one_duals_certify_infeasibility():
    # x1 + x2 = 1, x1 + x2 = 2 is infeasible; u^T b > 0 with A^T u <= 0
    a = np.array([[1.0, 1.0], [1.0, 1.0]])
    b = np.array([1.0, 2.0])
    lp = _phase_one(a, b)
    assert lp.objective > 0.5
    assert np.all(a.T @ lp.duals <= 1e-12)
    assert lp.duals @ b > 0.5


def test_reflexivity():
    rng = np.random.default_rng(0)
    x = WeightedTuple(random_points(rng, 4), rng.dirichlet(np.ones(4)))
    res = check_weighted_majorization(x, x)
    assert res.feasible and res.certificate.certifies()
    assert verify_certificate(np.eye(4), x, x) == (0.0, 0.0, 0.0)


def test_barycenter_mismatch_is_infeasible():
    x = WeightedTuple([2], [1.0])
    y = WeightedTuple([0, 1], [0.5, 0.5])
    res = check_weighted_majorization(x, y)
    assert not res.feasible
    assert res.witness_violation > 1e-8
    assert res.witness.violation(x, y) == pytest.approx(res.witness_violation)


def test_cube_roots_equilibria_feasible():
    x = WeightedTuple([0, 0], [0.5, 0.5])
    y = WeightedTuple(regular_polygon(3), np.full(3, 1 / 3))
    res = check_weighted_majorization(x, y)
    assert res.feasible and res.certificate.certifies()


def test_two_point_certificate():
    x, y = equilibrium_pair(ChargeConfiguration([0, 1], [0.25, 0.75]))
    assert max(verify_certificate([[0.75, 0.25]], x, y)) < 1e-14


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        check_weighted_majorization(WeightedTuple(np.eye(3), np.full(3, 1 / 3)), WeightedTuple([0j], [1.0]))
    with pytest.raises(ValueError):
        verify_certificate(np.eye(2), WeightedTuple([0, 1], [0.5, 0.5]), WeightedTuple([0j], [1.0]))


def test_random_feasible_certificates():
    rng = np.random.default_rng(1)
    for _ in range(100):
        x, y, _ = feasible_instance(rng, int(rng.integers(1, 6)), int(rng.integers(1, 6)))
        res = check_weighted_majorization(x, y)
        assert res.feasible
        assert res.certificate.max_residual < 1e-8
        assert res.certificate.r.min() >= -1e-12


def test_random_infeasible_witnesses():
    rng = np.random.default_rng(2)
    for _ in range(50):
        x, y = infeasible_instance(rng, int(rng.integers(1, 6)), int(rng.integers(2, 6)))
        res = check_weighted_majorization(x, y)
        assert not res.feasible
        assert res.witness_violation > 1e-8


def test_three_dimensional_instance():
    rng = np.random.default_rng(3)
    y = rng.normal(size=(5, 3))
    r = rng.dirichlet(np.ones(5), size=3)
    a = np.full(3, 1 / 3)
    x = WeightedTuple(r @ y, a)
    yt = WeightedTuple(y, a @ r)
    assert check_weighted_majorization(x, yt).feasible
    res = check_weighted_majorization(yt, x)
    assert not res.feasible and res.witness_violation > 1e-8


def test_transitivity_of_certificates():
    rng = np.random.default_rng(4)
    for _ in range(20):
        y = random_points(rng, 5)
        r2 = rng.dirichlet(np.ones(5), size=4)
        r1 = rng.dirichlet(np.ones(4), size=3)
        a = rng.dirichlet(np.ones(3))
        b = a @ r1
        c = b @ r2
        xt, yt, zt = WeightedTuple(r1 @ r2 @ y, a), WeightedTuple(r2 @ y, b), WeightedTuple(y, c)
        c1 = make_certificate(r1, xt, yt)
        c2 = make_certificate(r2, yt, zt)
        c12 = make_certificate(r1 @ r2, xt, zt)
        assert c12.max_residual <= c1.max_residual + c2.max_residual + 1e-12


def test_feasibility_implies_equal_barycenters():
    rng = np.random.default_rng(5)
    for _ in range(30):
        x, y, _ = feasible_instance(rng, 3, 4)
        assert check_weighted_majorization(x, y).feasible
        assert np.linalg.norm(x.barycenter - y.barycenter) < 1e-8


def test_uniform_square_case_is_doubly_stochastic():
    rng = np.random.default_rng(6)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        ds = np.mean([np.eye(n)[rng.permutation(n)] for _ in range(4)], axis=0)
        y = random_points(rng, n)
        u = np.full(n, 1 / n)
        res = check_weighted_majorization(WeightedTuple(ds @ y, u), WeightedTuple(y, u))
        assert res.feasible
        assert np.abs(res.certificate.r.sum(axis=0) - 1).max() < 1e-8


@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 5))
@settings(max_examples=60, deadline=None)
def test_feasible_construction_property(seed, m, n):
    x, y, _ = feasible_instance(np.random.default_rng(seed), m, n)
    res = check_weighted_majorization(x, y)
    assert res.feasible and res.certificate.certifies()


# convex battery

def test_convex_function_kinds():
    assert ConvexFunction("support", 0j, 0.0)(np.array([2.0, -1.0])).tolist() == [2.0, 0.0]
    assert ConvexFunction("power", 1j, alpha=2.0)(0j) == pytest.approx(1.0)
    assert ConvexFunction("linear", theta=np.pi / 2)(1j) == pytest.approx(1.0)
    assert not ConvexFunction("linear").nonnegative
    with pytest.raises(ValueError):
        ConvexFunction("bogus")(0j)


def test_battery_on_feasible_pairs():
    rng = np.random.default_rng(7)
    for _ in range(30):
        x, y, _ = feasible_instance(rng, 3, 4)
        assert convex_battery(x, y).worst_margin >= -1e-10


def test_battery_detects_barycenter_mismatch():
    x = WeightedTuple([2], [1.0])
    y = WeightedTuple([0, 1], [0.5, 0.5])
    assert convex_battery(x, y).worst_margin < 0


def test_battery_identical_pair_attains_zero():
    x = WeightedTuple(regular_polygon(4), np.full(4, 0.25))
    rep = convex_battery(x, x)
    assert rep.worst_margin == 0.0
    assert rep.evaluations > 0


def test_battery_requires_planar():
    t = WeightedTuple(np.eye(3), np.full(3, 1 / 3))
    with pytest.raises(ValueError):
        convex_battery(t, t)


def test_lp_battery_consistency():
    rng = np.random.default_rng(8)
    for i in range(500):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        if i % 2:
            x, y, _ = feasible_instance(rng, m, n)
        else:
            x = WeightedTuple(random_points(rng, m), rng.dirichlet(np.ones(m)))
            y = WeightedTuple(random_points(rng, n), rng.dirichlet(np.ones(n)))
        res = check_weighted_majorization(x, y)
        if res.feasible:
            assert convex_battery(x, y, angles=8, grid=3).worst_margin >= -1e-6


def test_piecewise_linear_witness_evaluation():
    phi = PiecewiseLinearConvex(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.zeros(2))
    assert phi([2 + 5j, -3 + 1j]).tolist() == [2.0, 3.0]
    assert "max(" in str(phi)


# Choquet comparison

def test_choquet_equilibria_dominated():
    rng = np.random.default_rng(9)
    for _ in range(10):
        x, y = equilibrium_pair(random_config(rng, 5))
        assert choquet_compare(x, y).verdict is Verdict.DOMINATED


def test_choquet_reversed_not_dominated():
    x, y = equilibrium_pair(ChargeConfiguration([0, 1, 2j], [1, 2, 3]))
    cmp = choquet_compare(y, x)
    assert cmp.verdict is Verdict.NOT_DOMINATED
    assert cmp.result.witness_violation > 1e-8
    assert cmp.battery is not None


def test_choquet_point_mass_at_barycenter():
    y = WeightedTuple(regular_polygon(5) + 1, np.full(5, 0.2))
    x = WeightedTuple([1 + 0j], [1.0])
    assert choquet_compare(x, y).verdict is Verdict.DOMINATED


def test_normal_matrix_diagonal_majorized_by_spectrum():
    rng = np.random.default_rng(10)
    for _ in range(10):
        n = int(rng.integers(2, 7))
        q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        tau = random_points(rng, n)
        a = q @ np.diag(tau) @ q.conj().T
        u = np.full(n, 1 / n)
        assert check_weighted_majorization(WeightedTuple(np.diag(a), u), WeightedTuple(tau, u)).feasible
