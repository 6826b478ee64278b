"""Random fixed-point germs with O(1) entries, for property checks."""

from __future__ import annotations

import numpy as np
from scipy.stats import ortho_group

from .tensors import CurvatureTensor, FixedPointGerm, NormalIsometry, TorsionData


def random_curvature(rng: np.random.Generator, d: int, terms: int = 3) -> CurvatureTensor:
    """Sum of Kulkarni-Nomizu squares ``S o S`` of random symmetric ``S``.

    Each square satisfies every algebraic curvature symmetry, so the sum does too.
    """
    R = np.zeros((d,) * 4)
    for _ in range(terms):
        S = rng.normal(size=(d, d))
        S = 0.5 * (S + S.T)
        R += rng.normal() * (np.einsum("ac,be->abce", S, S) - np.einsum("ae,bc->abce", S, S))
    return CurvatureTensor(R / terms)


def random_orthogonal(rng: np.random.Generator, m: int, min_gap: float = 0.05) -> np.ndarray:
    """Random orthogonal ``m x m`` matrix with ``|det(I - A)| >= min_gap``."""
    while True:
        if m == 1:
            A = np.array([[-1.0]])
        else:
            A = ortho_group.rvs(m, random_state=rng)
        if abs(np.linalg.det(np.eye(m) - A)) >= min_gap:
            return A


def random_torsion(rng: np.random.Generator, d: int, scale: float = 0.5) -> TorsionData:
    T = rng.normal(size=(d, d, d))
    dT = rng.normal(size=(d, d, d, d))
    return TorsionData.from_tbar(scale * (T - T.transpose(1, 0, 2)),
                                 scale * (dT - dT.transpose(1, 0, 2, 3)))


def random_germ(rng: np.random.Generator, d: int, n: int, p: int, torsion: bool = True,
                curvature: bool = True) -> FixedPointGerm:
    A = random_orthogonal(rng, d - n)
    R = random_curvature(rng, d) if curvature else CurvatureTensor.zeros(d)
    tor = random_torsion(rng, d) if torsion else None
    return FixedPointGerm(d, n, p, NormalIsometry(A), R, tor)


def germ_batch(rng: np.random.Generator, count: int, max_d: int = 5,
               tangent_dims=(0, 1, 2), torsion: bool = True) -> list[FixedPointGerm]:
    """``count`` germs with ``d <= max_d``, ``n`` from ``tangent_dims`` and random valid ``p``."""
    out = []
    while len(out) < count:
        n = int(rng.choice(tangent_dims))
        d = int(rng.integers(n + 1, max_d + 1))
        p = int(rng.integers(0, d + 1))
        out.append(random_germ(rng, d, n, p, torsion=torsion))
    return out
