"""Acceptance criteria, one test per criterion, each reporting a pass/fail line."""

import math
import time

import numpy as np

from heatchar import coefficients, gbf, spectral, torsion
from heatchar.jets import box_y_of_jet
from heatchar.sampling import germ_batch, random_orthogonal
from heatchar.tensors import (FixedPointGerm, TorsionData, sphere2_germ, wedge_trace,
                              wedge_trace_kronecker)
from heatchar.verify import planar_contorsion

from conftest import record_acceptance

ROT90 = np.array([[0.0, -1.0], [1.0, 0.0]])
THETAS = (math.pi / 2, math.pi, 2 * math.pi / 3)


def test_criterion_1_leading_coefficient():
    worst, slowest = 0.0, 0.0
    for theta in THETAS:
        start = time.perf_counter()
        fit = spectral.extract_coefficients(spectral.sphere_rotation_functions(theta))
        slowest = max(slowest, time.perf_counter() - start)
        expected = 2.0 / (4 * math.sin(theta / 2) ** 2)
        worst = max(worst, abs(fit[0] - expected))
    ok = worst < 1e-6 and slowest < 5.0
    record_acceptance(1, "sphere c0 = 2|det B|", ok,
                      f"max gap {worst:.3e} (tol 1e-6), slowest {slowest:.3f}s (limit 5s)")
    assert ok


def test_criterion_2_subleading_coefficient():
    start = time.perf_counter()
    worst = 0.0
    for theta in THETAS:
        for p, model in ((0, spectral.sphere_rotation_functions(theta)),
                         (1, spectral.sphere_rotation_oneforms_bochner(theta))):
            fit = spectral.extract_coefficients(model)
            worst = max(worst, abs(fit[1] - 2 * coefficients.b1(sphere2_germ(theta, p))))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-4 and elapsed < 10.0
    record_acceptance(2, "sphere c1 = 2 b1 for p in {0,1}", ok,
                      f"max gap {worst:.3e} (tol 1e-4), {elapsed:.3f}s (limit 10s)")
    assert ok


def test_criterion_3_flat_torus_exact():
    worst = 0.0
    for p, expected in ((0, 1.0), (1, 0.0), (2, 1.0)):
        model = spectral.torus_lattice_isometry(2, ROT90, p=p)
        values = [spectral.heat_trace(model, t) for t in np.geomspace(1e-4, 10.0, 9)]
        fit = spectral.extract_coefficients(model)
        formula = model.params["fixed_points"] * coefficients.b0(FixedPointGerm.build(ROT90, p))
        worst = max(worst, max(abs(v - expected) for v in values), abs(fit[0] - expected),
                    abs(formula - expected), max(abs(c) for c in fit.coefficients[1:]))
    ok = worst < 1e-10
    record_acceptance(3, "torus rotation pi/2 exact traces", ok,
                      f"max gap {worst:.3e} (tol 1e-10)")
    assert ok


def test_criterion_4_jet_oracle():
    start = time.perf_counter()
    germs = germ_batch(np.random.default_rng(4), 200, max_d=5, tangent_dims=(0, 1, 2))
    worst = 0.0
    for g in germs:
        worst = max(worst,
                    abs(coefficients.correction_C(g) - box_y_of_jet(coefficients.w_jet(g), g.p)),
                    abs(torsion.correction_Cbar(g) - box_y_of_jet(torsion.wbar_jet(g), g.p)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-10 and elapsed < 30.0
    record_acceptance(4, "C and Cbar against jets on 200 germs", ok,
                      f"max gap {worst:.3e} (tol 1e-10), {elapsed:.3f}s (limit 30s)")
    assert ok


def test_criterion_5_variant_reductions():
    germs = germ_batch(np.random.default_rng(5), 100, torsion=False)
    worst = 0.0
    for g in germs:
        g0 = g.with_torsion(TorsionData.zeros(g.d))
        b = coefficients.b1(g)
        worst = max(worst, abs(torsion.b1_bar(g0) - b))
        if g.p >= 1:
            worst = max(worst, abs(torsion.b1_hat(g0) - b))
        s = coefficients.lc_result(g.with_degree(0))
        worst = max(worst, abs(s.breakdown["correction"]),
                    abs(s.b1 - g.detB_abs * coefficients.curvature_bracket(g)))
    ok = worst < 1e-12
    record_acceptance(5, "zero torsion and p = 0 reductions", ok,
                      f"max gap {worst:.3e} (tol 1e-12)")
    assert ok


def test_criterion_6_torsion_spectral():
    # no nonzero constant contorsion on the square torus is invariant under a
    # quarter turn, so the check runs with Q_k = q_k J, |q| = 0.1
    start = time.perf_counter()
    Q = planar_contorsion([0.1, 0.0])
    model = spectral.torus_constant_torsion(2, ROT90, Q, 1)
    fit = spectral.extract_coefficients(model, t0=1e-2)
    germ = FixedPointGerm.build(ROT90, 1, torsion=TorsionData.from_contorsion(Q))
    expected = model.params["fixed_points"] * torsion.b1_bar(germ)
    gap = abs(fit[1] - expected)
    # nontrivial companion: half turn, where the torsion contribution is nonzero
    Q2 = planar_contorsion([0.1, 0.05])
    model2 = spectral.torus_constant_torsion(2, -np.eye(2), Q2, 1)
    fit2 = spectral.extract_coefficients(model2, t0=1e-2)
    germ2 = FixedPointGerm.build(-np.eye(2), 1, torsion=TorsionData.from_contorsion(Q2))
    expected2 = model2.params["fixed_points"] * torsion.b1_bar(germ2)
    gap2 = abs(fit2[1] - expected2)
    elapsed = time.perf_counter() - start
    invariant = spectral.contorsion_invariant(ROT90, Q)
    ok = gap < 1e-3 and gap2 < 1e-3 and abs(expected2) > 1e-3 and elapsed < 60.0
    record_acceptance(6, "flat torus with torsion, c1 = sum of bar b1", ok,
                      f"quarter turn gap {gap:.3e}, half turn gap {gap2:.3e} "
                      f"(c1 = {expected2:.6f}) (tol 1e-3), {elapsed:.3f}s (limit 60s); "
                      f"contorsion invariant: {invariant}")
    assert ok


def test_criterion_7_gbf():
    table = gbf.sphere_hodge_table(math.pi / 2)
    pairs = [(1.0, 2.0), (2.0, 3.0)]
    gap = 0.0
    for p in range(3):
        coeffs = gbf.coefficients_from_fits(table, p, pairs)
        for a, b in pairs:
            for l in (0, 1):
                gap = max(gap, gbf.gbf_identity_check(coeffs, p, a, b, l).gap)
    forms = 0.0
    for p in range(3):
        for a, b in pairs:
            for t in (0.05, 0.1, 0.5):
                f_d, _ = gbf.split_traces(table, p, a * a * t)
                _, f_delta = gbf.split_traces(table, p, b * b * t)
                second = table.f(b * b * t, p) + math.fsum(
                    (-1) ** (p - j) * (table.f(b * b * t, j) - table.f(a * a * t, j))
                    for j in range(p))
                forms = max(forms, abs(table.beta(p) + f_d + f_delta - second))
    lef = max(abs(math.fsum((-1) ** p * table.f(float(t), p) for p in range(3)) - 2.0)
              for t in np.geomspace(1e-3, 1.0, 25))
    ok = gap < 1e-5 and forms < 1e-10 and lef < 1e-10
    record_acceptance(7, "nonminimal coefficient identity on the sphere", ok,
                      f"identity gap {gap:.3e} (tol 1e-5), forms gap {forms:.3e} (tol 1e-10), "
                      f"Lefschetz gap {lef:.3e} (tol 1e-10)")
    assert ok


def test_criterion_8_exterior_algebra():
    rng = np.random.default_rng(8)
    kron = 0.0
    for d in range(1, 7):
        for n in range(d):
            for _ in range(50):
                M = np.eye(d)
                M[n:, n:] = random_orthogonal(rng, d - n, 0.0).T
                for p in range(d + 1):
                    kron = max(kron, abs(wedge_trace_kronecker(M, p, n) - wedge_trace(M, p)))
    alt = 0.0
    for d in range(1, 7):
        for _ in range(50):
            M = rng.normal(size=(d, d))
            s = math.fsum((-1) ** p * wedge_trace(M, p) for p in range(d + 1))
            alt = max(alt, abs(s - np.linalg.det(np.eye(d) - M)))
    ok = kron < 1e-10 and alt < 1e-10
    record_acceptance(8, "Kronecker evaluation and alternating sum", ok,
                      f"Kronecker gap {kron:.3e}, alternating gap {alt:.3e} (tol 1e-10)")
    assert ok
