"""Matrix-valued polynomials of total degree <= 2 in the normal variables.

A jet is stored as ``const + sum_i lin[i] y_i + sum_{i,j} quad[i, j] y_i y_j``
with ``quad`` symmetric in ``(i, j)``, so the coefficient of the monomial
``y_i y_j`` (``i < j``) is ``2 * quad[i, j]`` and that of ``y_i**2`` is
``quad[i, i]``.  Everything above degree 2 is discarded.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import ArgumentError
from .tensors import permutation_parity


class MatrixJet2:
    """Degree-2 jet of a ``d x d`` matrix function of ``m`` variables."""

    __slots__ = ("const", "lin", "quad")

    def __init__(self, const, lin=None, quad=None):
        const = np.array(const, dtype=float)
        if const.ndim != 2 or const.shape[0] != const.shape[1]:
            raise ArgumentError(f"jet constant term must be square, got {const.shape}")
        d = const.shape[0]
        if lin is None and quad is None:
            raise ArgumentError("number of variables is ambiguous; pass lin or quad")
        m = (np.shape(lin)[0] if lin is not None else np.shape(quad)[0])
        lin = np.zeros((m, d, d)) if lin is None else np.array(lin, dtype=float)
        quad = np.zeros((m, m, d, d)) if quad is None else np.array(quad, dtype=float)
        if lin.shape != (m, d, d) or quad.shape != (m, m, d, d):
            raise ArgumentError(f"jet shapes {lin.shape}, {quad.shape} do not match m={m}, d={d}")
        self.const = const
        self.lin = lin
        self.quad = 0.5 * (quad + quad.transpose(1, 0, 2, 3))

    @property
    def d(self) -> int:
        return self.const.shape[0]

    @property
    def m(self) -> int:
        return self.lin.shape[0]

    @classmethod
    def constant(cls, M, m: int) -> "MatrixJet2":
        M = np.asarray(M, dtype=float)
        return cls(M, np.zeros((m,) + M.shape))

    @classmethod
    def identity(cls, d: int, m: int) -> "MatrixJet2":
        return cls.constant(np.eye(d), m)

    def monomial(self, i: int, j: int) -> np.ndarray:
        """Coefficient matrix of the monomial ``y_i y_j``."""
        return self.quad[i, j] if i == j else 2.0 * self.quad[i, j]

    def _check(self, other: "MatrixJet2"):
        if (self.d, self.m) != (other.d, other.m):
            raise ArgumentError(
                f"jet mismatch: (d={self.d}, m={self.m}) vs (d={other.d}, m={other.m})")

    def __add__(self, other: "MatrixJet2") -> "MatrixJet2":
        self._check(other)
        return MatrixJet2(self.const + other.const, self.lin + other.lin, self.quad + other.quad)

    def __neg__(self) -> "MatrixJet2":
        return MatrixJet2(-self.const, -self.lin, -self.quad)

    def __sub__(self, other: "MatrixJet2") -> "MatrixJet2":
        return self + (-other)

    def scale(self, c: float) -> "MatrixJet2":
        return MatrixJet2(c * self.const, c * self.lin, c * self.quad)

    def __matmul__(self, other: "MatrixJet2") -> "MatrixJet2":
        self._check(other)
        a0, a1, a2 = self.const, self.lin, self.quad
        b0, b1, b2 = other.const, other.lin, other.quad
        const = a0 @ b0
        lin = np.einsum("ab,ibc->iac", a0, b1) + np.einsum("iab,bc->iac", a1, b0)
        cross = np.einsum("iab,jbc->ijac", a1, b1)
        quad = (np.einsum("ab,ijbc->ijac", a0, b2) + np.einsum("ijab,bc->ijac", a2, b0)
                + 0.5 * (cross + cross.transpose(1, 0, 2, 3)))
        return MatrixJet2(const, lin, quad)

    def evaluate(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return (self.const + np.einsum("i,iab->ab", y, self.lin)
                + np.einsum("i,j,ijab->ab", y, y, self.quad))

    def derivative(self, delta: int) -> np.ndarray:
        """First derivative in ``y_delta`` at 0."""
        return self.lin[delta].copy()

    def second_derivative(self, delta: int) -> np.ndarray:
        """Second derivative in ``y_delta`` at 0."""
        return 2.0 * self.quad[delta, delta]


def _scalar_product(a, b):
    """Truncated product of stacked scalar jets ``(c0, c1, c2)``."""
    a0, a1, a2 = a
    b0, b1, b2 = b
    cross = a1[..., :, None] * b1[..., None, :]
    return (a0 * b0,
            a0[..., None] * b1 + a1 * b0[..., None],
            a0[..., None, None] * b2 + a2 * b0[..., None, None]
            + 0.5 * (cross + np.swapaxes(cross, -1, -2)))


def wedge_trace_jet(jet: MatrixJet2, p: int):
    """tr(wedge^p) of a jet as a scalar jet ``(c0, c1[m], c2[m, m])``.

    Sums the Leibniz determinant expansion of every principal ``p x p``
    block, multiplying entries as truncated polynomials.
    """
    d, m = jet.d, jet.m
    if not 0 <= p <= d:
        raise ArgumentError(f"degree p={p} outside 0..{d}")
    total0, total1, total2 = 0.0, np.zeros(m), np.zeros((m, m))
    if p == 0:
        return 1.0, total1, total2
    perms = list(itertools.permutations(range(p)))
    signs = np.array([permutation_parity(s) for s in perms], dtype=float)
    rows = np.array(perms)                       # (P, p)
    cols = np.arange(p)
    for idx in itertools.combinations(range(d), p):
        idx = np.array(idx)
        r = idx[rows]                            # (P, p) row index of each factor
        c = np.broadcast_to(idx[cols], r.shape)
        fac0 = jet.const[r, c]                   # (P, p)
        fac1 = np.moveaxis(jet.lin[:, r, c], 0, -1)            # (P, p, m)
        fac2 = np.moveaxis(jet.quad[:, :, r, c], (0, 1), (-2, -1))  # (P, p, m, m)
        acc = (np.ones(len(perms)), np.zeros((len(perms), m)), np.zeros((len(perms), m, m)))
        for k in range(p):
            acc = _scalar_product(acc, (fac0[:, k], fac1[:, k], fac2[:, k]))
        total0 += float(signs @ acc[0])
        total1 = total1 + signs @ acc[1]
        total2 = total2 + np.einsum("P,Pij->ij", signs, acc[2])
    return total0, total1, total2


def box_y_of_jet(jet: MatrixJet2, p: int) -> float:
    """Flat Laplacian ``sum_delta d^2/dy_delta^2`` of tr(wedge^p jet) at y = 0."""
    _, _, c2 = wedge_trace_jet(jet, p)
    return float(2.0 * math.fsum(np.diag(c2)))
