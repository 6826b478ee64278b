import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatchar.errors import ArgumentError
from heatchar.jets import MatrixJet2, box_y_of_jet, wedge_trace_jet
from heatchar.tensors import wedge_trace


def random_jet(rng, d, m):
    return MatrixJet2(rng.normal(size=(d, d)), rng.normal(size=(m, d, d)),
                      rng.normal(size=(m, m, d, d)))


def fd_box(jet, p, h=1e-4):
    """Central second differences of the untruncated tr(wedge^p) at y = 0."""
    f0 = wedge_trace(jet.evaluate(np.zeros(jet.m)), p)
    total = 0.0
    for delta in range(jet.m):
        e = np.zeros(jet.m)
        e[delta] = h
        total += (wedge_trace(jet.evaluate(e), p) - 2 * f0 + wedge_trace(jet.evaluate(-e), p)) / h ** 2
    return total


class TestArithmetic:
    def test_quad_symmetrized(self, rng):
        q = rng.normal(size=(2, 2, 3, 3))
        jet = MatrixJet2(np.eye(3), quad=q)
        np.testing.assert_allclose(jet.quad, jet.quad.transpose(1, 0, 2, 3))

    def test_product_matches_evaluation(self, rng):
        a, b = random_jet(rng, 3, 2), random_jet(rng, 3, 2)
        prod = a @ b
        # truncation error is cubic in |y|
        for scale in (1e-2, 1e-3):
            y = scale * rng.normal(size=2)
            err = np.max(np.abs(prod.evaluate(y) - a.evaluate(y) @ b.evaluate(y)))
            assert err < 50 * scale ** 3

    def test_add_sub_scale(self, rng):
        a, b = random_jet(rng, 2, 2), random_jet(rng, 2, 2)
        y = rng.normal(size=2)
        np.testing.assert_allclose((a + b).evaluate(y), a.evaluate(y) + b.evaluate(y))
        np.testing.assert_allclose((a - b).evaluate(y), a.evaluate(y) - b.evaluate(y))
        np.testing.assert_allclose(a.scale(3.0).evaluate(y), 3.0 * a.evaluate(y))

    def test_monomial_coefficients(self):
        q = np.zeros((2, 2, 1, 1))
        q[0, 1] = q[1, 0] = 1.5
        jet = MatrixJet2(np.zeros((1, 1)), quad=q)
        assert jet.monomial(0, 1)[0, 0] == 3.0
        assert jet.evaluate([1.0, 1.0])[0, 0] == pytest.approx(3.0)

    def test_derivatives(self, rng):
        jet = random_jet(rng, 2, 3)
        np.testing.assert_array_equal(jet.derivative(1), jet.lin[1])
        np.testing.assert_allclose(jet.second_derivative(2), 2 * jet.quad[2, 2])

    def test_mismatch(self, rng):
        with pytest.raises(ArgumentError):
            random_jet(rng, 2, 2) @ random_jet(rng, 3, 2)

    def test_needs_variables(self):
        with pytest.raises(ArgumentError):
            MatrixJet2(np.eye(2))


class TestBox:
    def test_identity_jet(self):
        assert box_y_of_jet(MatrixJet2.identity(3, 2), 2) == 0.0

    def test_scalar_monomial(self):
        c = 0.7
        jet = MatrixJet2(np.ones((1, 1)), quad=np.full((1, 1, 1, 1), c))
        assert box_y_of_jet(jet, 1) == pytest.approx(2 * c)

    def test_wedge_trace_constant_term(self, rng):
        jet = random_jet(rng, 4, 2)
        for p in range(5):
            assert wedge_trace_jet(jet, p)[0] == pytest.approx(wedge_trace(jet.const, p), abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
    def test_against_finite_differences(self, d, m, seed):
        rng = np.random.default_rng(seed)
        jet = random_jet(rng, d, m).scale(0.5)
        for p in range(d + 1):
            assert abs(box_y_of_jet(jet, p) - fd_box(jet, p)) < 1e-5

    def test_degree_out_of_range(self):
        with pytest.raises(ArgumentError):
            wedge_trace_jet(MatrixJet2.identity(2, 1), 3)
