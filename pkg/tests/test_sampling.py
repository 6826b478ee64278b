import numpy as np
import pytest

from heatchar.sampling import (germ_batch, random_curvature, random_germ, random_orthogonal,
                               random_torsion)
from heatchar.tensors import curvature_symmetry_defects


@pytest.mark.parametrize("d", [2, 3, 5])
def test_curvature_satisfies_symmetries(rng, d):
    R = random_curvature(rng, d)
    assert max(curvature_symmetry_defects(R.components).values()) < 1e-13
    assert np.max(np.abs(R.components)) > 1e-3


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_orthogonal_away_from_unit_eigenvalue(rng, m):
    A = random_orthogonal(rng, m, 0.05)
    np.testing.assert_allclose(A.T @ A, np.eye(m), atol=1e-12)
    assert abs(np.linalg.det(np.eye(m) - A)) >= 0.05


def test_torsion_skew(rng):
    tor = random_torsion(rng, 4)
    assert np.max(np.abs(tor.Tbar + tor.Tbar.transpose(1, 0, 2))) == 0.0
    assert np.max(np.abs(tor.dQ + tor.dQ.transpose(0, 2, 1, 3))) < 1e-14


def test_batch_ranges(rng):
    batch = germ_batch(rng, 60, max_d=5, tangent_dims=(0, 1, 2))
    assert all(g.d <= 5 and g.n in (0, 1, 2) and 0 <= g.p <= g.d for g in batch)
    assert {g.n for g in batch} == {0, 1, 2}


def test_flat_germ(rng):
    g = random_germ(rng, 3, 1, 1, torsion=False, curvature=False)
    assert g.torsion is None and not np.any(g.R.components)
