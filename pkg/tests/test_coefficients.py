import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatchar import coefficients
from heatchar.coefficients import (DerivativeTensors, b0, b1, correction_C, curvature_bracket,
                                   heat_coefficients, leibniz_box_trace, phi_jet, w_jet)
from heatchar.errors import ArgumentError
from heatchar.jets import MatrixJet2, box_y_of_jet
from heatchar.sampling import random_curvature, random_germ, random_orthogonal
from heatchar.tensors import (CurvatureTensor, FixedPointGerm, rotation, scalar_curvature,
                              sphere2_germ, wedge_trace)

from conftest import sphere_fixed_point_b1


class TestLeibnizEngine:
    def test_zero_derivatives(self, rng):
        dt = DerivativeTensors(rng.normal(size=(3, 3)), np.zeros((2, 3, 3)), np.zeros((2, 3, 3)))
        assert leibniz_box_trace(dt, 2) == 0.0

    def test_degree_zero(self, rng):
        dt = DerivativeTensors(np.eye(3), rng.normal(size=(2, 3, 3)), rng.normal(size=(2, 3, 3)))
        assert leibniz_box_trace(dt, 0) == 0.0

    @pytest.mark.parametrize("d,m", [(3, 2), (3, 3), (2, 1), (4, 2)])
    def test_matches_jet_box(self, rng, d, m):
        jet = MatrixJet2(rng.normal(size=(d, d)), rng.normal(size=(m, d, d)),
                         rng.normal(size=(m, m, d, d)))
        D2 = np.stack([jet.second_derivative(k) for k in range(m)])
        dt = DerivativeTensors(jet.const, jet.lin, D2)
        for p in range(d + 1):
            assert abs(leibniz_box_trace(dt, p) - box_y_of_jet(jet, p)) < 1e-10

    def test_shape_mismatch(self):
        with pytest.raises(ArgumentError):
            DerivativeTensors(np.eye(3), np.zeros((2, 3, 3)), np.zeros((2, 2, 2)))

    def test_bad_degree(self):
        dt = DerivativeTensors(np.eye(2), np.zeros((1, 2, 2)), np.zeros((1, 2, 2)))
        with pytest.raises(ArgumentError):
            leibniz_box_trace(dt, 3)


class TestB0:
    def test_rotation_pi(self):
        assert b0(FixedPointGerm.build(rotation(math.pi), 0)) == pytest.approx(0.25)
        assert b0(FixedPointGerm.build(rotation(math.pi), 1)) == pytest.approx(-0.5)

    @pytest.mark.parametrize("theta", np.linspace(0.2, 2 * math.pi - 0.2, 7))
    def test_alternating_sum_is_one(self, theta):
        s = sum((-1) ** p * b0(FixedPointGerm.build(rotation(theta), p)) for p in range(3))
        assert s == pytest.approx(1.0, abs=1e-12)


class TestCorrection:
    def test_flat(self, rng):
        g = random_germ(rng, 4, 1, 2, torsion=False, curvature=False)
        assert correction_C(g) == 0.0

    def test_degree_zero(self, rng):
        assert correction_C(random_germ(rng, 4, 1, 0, torsion=False)) == 0.0

    def test_d4_n1_jet(self, rng):
        for p in range(5):
            g = random_germ(rng, 4, 1, p, torsion=False)
            assert abs(correction_C(g) - box_y_of_jet(w_jet(g), p)) < 1e-10

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2), st.integers(1, 5), st.integers(0, 2 ** 31 - 1))
    def test_jet_equivalence(self, n, extra, seed):
        rng = np.random.default_rng(seed)
        d = min(n + extra, 5)
        if d <= n:
            d = n + 1
        for p in range(d + 1):
            g = random_germ(rng, d, n, p, torsion=False)
            assert abs(correction_C(g) - box_y_of_jet(w_jet(g), p)) < 1e-10

    def test_restricted_equals_full_range(self, rng):
        for n in (1, 2):
            g = random_germ(rng, 5, n, 3, torsion=False)
            dt = coefficients.derivative_tensors_lc(g)
            assert abs(leibniz_box_trace(dt, 3, True) - leibniz_box_trace(dt, 3, False)) < 1e-12


class TestPhiJet:
    def test_flat_is_zero(self, rng):
        g = random_germ(rng, 3, 1, 1, torsion=False, curvature=False)
        jet = phi_jet(g)
        assert not np.any(jet.quad)

    def test_only_quadratic(self, rng):
        jet = phi_jet(random_germ(rng, 4, 1, 2, torsion=False))
        assert not np.any(jet.const) and not np.any(jet.lin)

    def test_sphere_entries(self):
        g = sphere2_germ(math.pi / 3, 1)
        A, B, R = g.A, g.B, g.R.components
        jet = phi_jet(g)
        direct = np.zeros((2, 2))
        for k in range(2):
            for q in range(2):
                for r in range(2):
                    for s in range(2):
                        for l in range(2):
                            direct[k, q] += -0.5 * A[r, l] * B[l, k] * B[s, q] * R[r, s, 0, 1]
        # the jet stores the symmetric part of the quadratic form
        np.testing.assert_allclose(jet.quad[:, :, 0, 1], 0.5 * (direct + direct.T), atol=1e-14)

    def test_second_derivatives_match_engine_tensor(self, rng):
        g = random_germ(rng, 4, 1, 2, torsion=False)
        jet = phi_jet(g)
        K = coefficients.phi_curvature_second_derivatives(g)
        for delta in range(g.m):
            np.testing.assert_allclose(-jet.second_derivative(delta)[1:, 1:], K[delta], atol=1e-13)


class TestB1:
    def test_flat(self, rng):
        g = random_germ(rng, 4, 2, 2, torsion=False, curvature=False)
        assert b1(g) == 0.0

    def test_scalar_reduction(self, rng):
        g = random_germ(rng, 4, 1, 0, torsion=False)
        res = coefficients.lc_result(g)
        assert res.breakdown["correction"] == 0.0
        assert res.b1 == pytest.approx(g.detB_abs * curvature_bracket(g), abs=1e-14)

    def test_scalar_independent_of_form_action(self, rng):
        R = random_curvature(rng, 3)
        A = random_orthogonal(rng, 3)
        g1 = FixedPointGerm.build(A, 0, R)
        g2 = FixedPointGerm.build(A, 0, R)
        assert b1(g1) == b1(g2)

    @pytest.mark.parametrize("theta", [math.pi / 2, math.pi, 2 * math.pi / 3, 1.0])
    @pytest.mark.parametrize("p", [0, 1])
    def test_sphere_closed_form(self, theta, p):
        assert b1(sphere2_germ(theta, p)) == pytest.approx(sphere_fixed_point_b1(theta, p),
                                                           abs=1e-12)

    def test_sphere_degree_two_equals_degree_zero(self):
        # wedge^2 of a rotation is trivial, and the curvature acts trivially on top forms
        for theta in (0.5, 2.0):
            assert b1(sphere2_germ(theta, 2)) == pytest.approx(b1(sphere2_germ(theta, 0)))

    def test_bracket_empty_tangent(self):
        g = sphere2_germ(1.0, 0)
        R = g.R.components
        B = g.B
        expected = (scalar_curvature(g.R) / 6 + np.einsum("kckc->", R) / 6
                    + np.einsum("iksh,ki,hs->", R, B, B) / 3
                    + np.einsum("ikth,kt,hi->", R, B, B) / 3)
        assert curvature_bracket(g) == pytest.approx(expected, abs=1e-14)

    def test_linear_in_curvature(self, rng):
        for _ in range(5):
            A = random_orthogonal(rng, 3)
            R1, R2 = random_curvature(rng, 4), random_curvature(rng, 4)
            x, y = rng.normal(size=2)
            Rs = CurvatureTensor(x * R1.components + y * R2.components)
            for p in range(5):
                g = lambda R: FixedPointGerm.build(A, p, R, n=1)
                assert abs(b1(g(Rs)) - x * b1(g(R1)) - y * b1(g(R2))) < 1e-10

    def test_heat_coefficients_variants(self, rng):
        g = random_germ(rng, 3, 1, 1)
        names = [r.variant for r in heat_coefficients(g)]
        assert names == ["levi-civita", "torsion-bar", "torsion-hat"]
        assert [r.variant for r in heat_coefficients(g.with_degree(0))] == [
            "levi-civita", "torsion-bar"]
        assert len(heat_coefficients(g.with_torsion(None))) == 1

    def test_b0_shared_by_variants(self, rng):
        g = random_germ(rng, 4, 1, 2)
        vals = {r.b0 for r in heat_coefficients(g)}
        assert max(vals) - min(vals) == 0.0
        assert wedge_trace(g.A_tilde, 2) * g.detB_abs == pytest.approx(b0(g))
