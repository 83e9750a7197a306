"""Acceptance criteria, one test each.

Every test prints a single ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line (visible even without ``-s``) before asserting.
"""
from math import comb

import numpy as np
import pytest

from logpot.cli import build_parser, format_config, run
from logpot.conjecture import InertiaSpec, dbs_hierarchy_trial, inertia_closed_form, inertia_moment_mc
from logpot.dbs import (MAX_SETS, construct_first_order, construct_hierarchy,
                        m_matrix_identity, moment_inequalities, newton_identity_sides, uniqueness_probe)
from logpot.hausdorff import verify_t5, verify_t6
from logpot.infinite import (builtin_family, column_residual, interlacing_check, t7_certificate, t8_battery,
                             truncate)
from logpot.linalg import match_multisets
from logpot.majorization import WeightedTuple, check_weighted_majorization
from logpot.potential import ChargeConfiguration, normalize, solve_equilibria
from oracles import random_points, random_sweep, regular_polygon

ALPHAS = (1.0, 1.5, 2.0, 3.0)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def sweep():
    configs = [normalize(c) for c in random_sweep(500, seed=2024)]
    return [(c, solve_equilibria(c)) for c in configs]


def expanded_polynomial(c):
    # sum_i a_i prod_{j != i} (z - z_j), built directly from the definition
    p = np.zeros(c.n, dtype=complex)
    for i in range(c.n):
        p = p + c.charges[i] * np.poly(np.delete(c.points, i))
    return p


def test_criterion_01_equilibria(sweep, report):
    worst_match = worst_res = 0.0
    for c, eq in sweep:
        roots = np.roots(expanded_polynomial(c))
        worst_match = max(worst_match, match_multisets(eq.points, roots).distance)
        worst_res = max(worst_res, eq.max_residual)
    ok = worst_match < 1e-7 and worst_res < 1e-8
    report(1, ok, f"500 configs, max matching distance {worst_match:.2e}, max residual {worst_res:.2e}")


def test_criterion_02_first_order(sweep, report):
    worst, infeasible = 0.0, 0
    for c, eq in sweep:
        worst = max(worst, construct_first_order(c, eq).max_residual)
        n = c.n
        x = WeightedTuple(eq.points, np.full(n - 1, 1 / (n - 1)))
        y = WeightedTuple(c.points, (1 - c.charges) / (n - 1))
        infeasible += not check_weighted_majorization(x, y).feasible
    ok = worst < 1e-8 and infeasible == 0
    report(2, ok, f"500 configs, max certificate residual {worst:.2e}, LP infeasible on {infeasible}")


def test_criterion_03_hierarchy(sweep, report):
    worst_cert = worst_newton = 0.0
    levels = 0
    for c, eq in sweep:
        for k in range(1, c.n):
            if comb(c.n, k) > MAX_SETS:
                continue
            worst_cert = max(worst_cert, construct_hierarchy(c, k, eq, transforms=20).max_residual)
            lhs, rhs, scale = newton_identity_sides(c, eq, k)
            worst_newton = max(worst_newton, abs(lhs - rhs) / scale)
            levels += 1
    ok = worst_cert < 1e-8 and worst_newton < 1e-8
    report(3, ok, f"{levels} levels, max certificate residual {worst_cert:.2e} "
                  f"over all m and 20 transforms, max scaled identity residual {worst_newton:.2e}")


def test_criterion_04_uniqueness(sweep, report):
    rng = np.random.default_rng(4)
    false_passes = 0
    for c, eq in sweep[:100]:
        w = eq.points.copy()
        j = int(rng.integers(w.size))
        w[j] += 1e-3 * c.diameter * np.exp(2j * np.pi * rng.uniform())
        false_passes += not uniqueness_probe(c, w, tol=1e-6).detected
    report(4, false_passes == 0, f"100 perturbed instances, {false_passes} false passes")


def test_criterion_05_moments(sweep, report):
    worst, checks = np.inf, 0
    for c, eq in sweep:
        for k in range(1, c.n):
            for m in range(1, k + 1):
                for alpha in ALPHAS:
                    worst = min(worst, moment_inequalities(c, eq, k, m, alpha))
                    checks += 1
    report(5, worst >= -1e-9, f"{checks} (k, m, alpha) checks, min margin {worst:.2e}")


def test_criterion_06_hausdorff(sweep, report):
    directed = min(verify_t5(c, eq).margin for c, eq in sweep)
    line = random_sweep(500, seed=6, collinear=True)
    collinear = min(verify_t6(c).margin for c in line)
    sharp_polygon = max(abs(verify_t5(ChargeConfiguration(regular_polygon(n), np.ones(n))).margin)
                 for n in range(3, 13))
    sharp_pair = abs(verify_t6(ChargeConfiguration([-1, 1], [1, 1])).margin)
    ok = directed >= -1e-9 and collinear >= -1e-9 and sharp_polygon < 1e-9 and sharp_pair < 1e-9
    report(6, ok, f"directed min margin {directed:.2e}, collinear min margin {collinear:.2e}, "
                  f"n-gon |margin| {sharp_polygon:.2e}, symmetric pair |margin| {sharp_pair:.2e}")


def test_criterion_07_lp_soundness(report):
    rng = np.random.default_rng(7)
    mismatches = weak_witnesses = feasible_count = 0
    for i in range(500):
        m, n = int(rng.integers(1, 7)), int(rng.integers(2, 7))
        y = random_points(rng, n)
        if i % 2 == 0:
            r = rng.dirichlet(np.full(n, 0.7), size=m)
            a = rng.dirichlet(np.ones(m))
            b = a @ r
            x, yt, truth = WeightedTuple(r @ y, a), WeightedTuple(y, b / b.sum()), True
        else:
            # a point outside the unit disk is outside the hull of y
            pts = random_points(rng, m, 0.5)
            pts[int(rng.integers(m))] = 1.5 * np.exp(2j * np.pi * rng.uniform())
            x = WeightedTuple(pts, rng.dirichlet(np.ones(m)))
            yt, truth = WeightedTuple(y, rng.dirichlet(np.ones(n))), False
        res = check_weighted_majorization(x, yt)
        feasible_count += res.feasible
        mismatches += res.feasible != truth
        if not res.feasible:
            weak_witnesses += not res.witness.violation(x, yt) > 1e-8
    ok = mismatches == 0 and weak_witnesses == 0
    report(7, ok, f"500 pairs ({feasible_count} feasible), {mismatches} verdict mismatches, "
                  f"{weak_witnesses} witnesses failing re-verification")


def test_criterion_08_interlacing(report):
    real = random_sweep(500, seed=8, real=True)
    bad = sum(not interlacing_check(c).interlaced for c in real)
    column = 0.0
    for c in real:
        column = max(column, column_residual(t7_certificate(c), c))
    for n in (4, 8, 16, 32):
        c = truncate(builtin_family("geometric-real"), n)
        bad += not interlacing_check(c).interlaced
        column = max(column, column_residual(t7_certificate(c), c))
    ok = bad == 0 and column < 1e-8
    report(8, ok, f"504 real configurations, {bad} not interlaced, max column residual {column:.2e}")


def test_criterion_09_nonnegative_battery(report):
    rng = np.random.default_rng(9)
    transforms = [(complex(*rng.normal(size=2)), complex(*rng.normal(size=2))) for _ in range(50)]
    worst = np.inf
    for base in (0.5, 0.7):
        for n in (4, 8, 16, 32):
            c = truncate(builtin_family("geometric-spiral", base=base), n)
            eq = solve_equilibria(c)
            for lam, mu in transforms:
                worst = min(worst, t8_battery(c, lam, mu, eq).worst_margin)
    report(9, worst >= -1e-9, f"8 truncations x 50 transforms, min margin {worst:.2e}")


def test_criterion_10_m_matrix(report):
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(1, 9))
        x = rng.uniform(0.01, 1.0, m)
        x *= rng.uniform(0.05, 0.99) / np.linalg.norm(x)
        worst = max(worst, m_matrix_identity(x)[2])
    report(10, worst < 1e-12, f"1000 vectors, max residual {worst:.2e}")


def test_criterion_11_conjecture_lab(sweep, report, tmp_path):
    rng = np.random.default_rng(11)
    flags = 0
    small = [(c, eq) for c, eq in sweep if c.n <= 7]
    for _ in range(1000):
        c, eq = small[int(rng.integers(len(small)))]
        k = int(rng.integers(1, c.n))
        m = int(rng.integers(1, k + 1))
        flags += dbs_hierarchy_trial(c, eq, k, m) < -1e-9
    worst_z = 0.0
    for i in range(50):
        v = regular_polygon(int(rng.integers(3, 9)), rng.uniform(0.5, 2.0), rng.uniform(0, np.pi))
        v = v + complex(*rng.normal(size=2))
        d = rng.normal(size=3)
        spec = InertiaSpec(2.0, tuple(rng.normal(size=3)), tuple(d / np.linalg.norm(d)))
        est, se = inertia_moment_mc(v, spec, 20_000, seed=i)
        worst_z = max(worst_z, abs(est - inertia_closed_form(v, spec)) / se)
    # sweeps over open conjectures only need to produce their report files
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(format_config(sweep[0][0]))
    out = tmp_path / "rep"
    run(build_parser().parse_args(["conjecture", str(cfg), "--out", str(out), "--trials", "200"]))
    files = sorted(p.name for p in out.iterdir())
    ok = flags == 0 and worst_z <= 4 and files == ["hierarchy_trials.csv", "inertia.csv", "summary.txt"]
    report(11, ok, f"1000 proven-case trials, {flags} flagged; 50 polygons, max |z| {worst_z:.2f}; "
                   f"report files {files}")


def test_criterion_12_determinism(tmp_path, report):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("finite\n0 0 1\n1 0.2 2\n0.3 1 3\n-0.5 0.4 1\n")
    fam = tmp_path / "fam.txt"
    fam.write_text("family geometric-spiral base=0.8\n")
    commands = [["solve", cfg], ["majorize", cfg], ["hierarchy", cfg], ["hausdorff", cfg],
                ["ladder", fam, "--levels", "8,16,32,64"], ["conjecture", cfg, "--trials", "20000"]]
    differing = []
    for argv in commands:
        outputs = []
        for rep in ("a", "b"):
            out = tmp_path / f"{argv[0]}-{rep}"
            run(build_parser().parse_args([str(a) for a in argv] + ["--seed", "5", "--out", str(out)]))
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if outputs[0] != outputs[1] or not outputs[0]:
            differing.append(argv[0])
    report(12, not differing, f"{len(commands)} subcommands run twice, differing: {differing or 'none'}")
