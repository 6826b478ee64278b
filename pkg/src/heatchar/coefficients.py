"""Equivariant heat coefficients b0 and b1 of the Bochner Laplacian on p-forms.

Both are reported at a single fixed point ``a`` of an isometry, as the
integrand of the fixed-point contribution to the small-time expansion

    Tr(T* e^{-t Laplacian}) ~ sum_N (4 pi t)^(-n/2) sum_k t^k int_N b_k.

The correction term ``C = box_y tr[wedge^p W]|_{y=0}`` is computed through a
single Leibniz product-rule engine (:func:`leibniz_box_trace`).  The jet
functions (:func:`phi_jet`, :func:`w_jet`) rebuild the same quantity from the
Taylor expansion of ``W`` and serve as an independent oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError
from .jets import MatrixJet2
from .tensors import FixedPointGerm, scalar_curvature, wedge_trace

VARIANTS = ("levi-civita", "torsion-bar", "torsion-hat")


@dataclass(frozen=True)
class DerivativeTensors:
    """Value and y-derivatives of the matrix ``W`` at ``y = 0``.

    ``D1[delta, l, i] = dW_li/dy_delta`` and
    ``D2[delta, l, i] = d^2 W_li/dy_delta^2``.
    """

    W0: np.ndarray
    D1: np.ndarray
    D2: np.ndarray

    def __post_init__(self):
        W0, D1, D2 = (np.asarray(x, dtype=float) for x in (self.W0, self.D1, self.D2))
        if W0.ndim != 2 or W0.shape[0] != W0.shape[1]:
            raise ArgumentError(f"W0 must be square, got {W0.shape}")
        d = W0.shape[0]
        if D1.ndim != 3 or D1.shape[1:] != (d, d) or D2.shape != D1.shape:
            raise ArgumentError(
                f"derivative shapes {D1.shape}, {D2.shape} inconsistent with d={d}")
        object.__setattr__(self, "W0", W0)
        object.__setattr__(self, "D1", D1)
        object.__setattr__(self, "D2", D2)

    @property
    def d(self) -> int:
        return self.W0.shape[0]

    @property
    def m(self) -> int:
        return self.D1.shape[0]


@dataclass(frozen=True)
class HeatCoefficientResult:
    variant: str
    b0: float
    b1: float
    breakdown: dict = field(default_factory=dict)


def _replaced_det(W0: np.ndarray, idx, replacements) -> float:
    """det of ``W0[idx, idx]`` with some columns swapped for given vectors."""
    sub = W0[np.ix_(idx, idx)].copy()
    for col, vec in replacements:
        sub[:, col] = vec[list(idx)]
    return float(np.linalg.det(sub))


def _box_terms(W0, D1, D2, idx) -> list[float]:
    """Second-derivative Leibniz terms of det W[idx, idx], summed over directions."""
    out = []
    p = len(idx)
    for delta in range(D1.shape[0]):
        d1, d2 = D1[delta], D2[delta]
        if np.any(d1):
            for m1, m2 in itertools.combinations(range(p), 2):
                out.append(2.0 * _replaced_det(
                    W0, idx, [(m1, d1[:, idx[m1]]), (m2, d1[:, idx[m2]])]))
        if np.any(d2):
            for m3 in range(p):
                out.append(_replaced_det(W0, idx, [(m3, d2[:, idx[m3]])]))
    return out


def leibniz_box_trace(dt: DerivativeTensors, p: int, restrict_normal: bool = False) -> float:
    """``sum_delta d^2/dy_delta^2 tr[wedge^p W]`` at ``y = 0`` by the product rule.

    ``tr[wedge^p W]`` is the sum of ``p x p`` principal minors; the factor in
    slot ``m`` of a minor is column ``i_m``.  Two first-derivative columns
    contribute with weight 2, one second-derivative column with weight 1.

    With ``restrict_normal`` the index tuples are split into tangent and
    normal slots: only normal tuples are enumerated and each is weighted by
    the ``binomial(n, p - p1)`` tangent completions.  This is exact when
    ``W0`` is the identity on tangent directions and the derivatives vanish
    on tangent rows and columns.
    """
    d, m = dt.d, dt.m
    if not 0 <= p <= d:
        raise ArgumentError(f"degree p={p} outside 0..{d}")
    if p == 0:
        return 0.0
    terms = []
    if not restrict_normal:
        for idx in itertools.combinations(range(d), p):
            terms.extend(_box_terms(dt.W0, dt.D1, dt.D2, idx))
        return math.fsum(terms)
    n = d - m
    for p1 in range(max(1, p - n), min(p, m) + 1):
        weight = math.comb(n, p - p1)
        for idx in itertools.combinations(range(n, d), p1):
            terms.extend(weight * t for t in _box_terms(dt.W0, dt.D1, dt.D2, idx))
    return math.fsum(terms)


# --------------------------------------------------------------------------
# Levi-Civita case
# --------------------------------------------------------------------------

def _normal_curvature(germ: FixedPointGerm) -> np.ndarray:
    n = germ.n
    return germ.R.components[n:, n:, n:, n:]


def phi_curvature_second_derivatives(germ: FixedPointGerm) -> np.ndarray:
    """``K[delta, mu, i] = -d^2 Psi_mu,i/dy_delta^2`` on the normal block.

    ``K = A_{r lam} B_{lam delta} B_{v delta} R_{r v mu i}``.
    """
    A, B = germ.A, germ.B
    RN = _normal_curvature(germ)
    return np.einsum("rl,ld,vd,rvmi->dmi", A, B, B, RN)


def derivative_tensors_lc(germ: FixedPointGerm) -> DerivativeTensors:
    """W = A_tilde (1 - Phi): ``D1 = 0`` and ``D2 = A_tilde . (-d^2 Phi)``."""
    d, n, m = germ.d, germ.n, germ.m
    D2 = np.zeros((m, d, d))
    D2[:, n:, n:] = np.einsum("ml,dmi->dli", germ.A, phi_curvature_second_derivatives(germ))
    return DerivativeTensors(germ.A_tilde, np.zeros((m, d, d)), D2)


def correction_C(germ: FixedPointGerm) -> float:
    """Correction term C from the curvature of the transport along normal geodesics."""
    return leibniz_box_trace(derivative_tensors_lc(germ), germ.p, restrict_normal=True)


def phi_jet(germ: FixedPointGerm) -> MatrixJet2:
    """Quadratic jet of ``Phi = blockdiag(0, Psi)`` in ``y``.

    ``Psi_ij = -1/2 A_rl B_lk B_sq R_rsij y_k y_q``, contracted term by term
    in loop order rather than through :func:`phi_curvature_second_derivatives`.
    """
    d, n, m = germ.d, germ.n, germ.m
    A, B, R = germ.A, germ.B, germ.R.components
    quad = np.zeros((m, m, d, d))
    for k in range(m):
        for q in range(m):
            for i in range(m):
                for j in range(m):
                    acc = 0.0
                    for r in range(m):
                        for s in range(m):
                            x = R[n + r, n + s, n + i, n + j]
                            if x:
                                acc += A[r] @ B[:, k] * B[s, q] * x
                    quad[k, q, n + i, n + j] = -0.5 * acc
    return MatrixJet2(np.zeros((d, d)), np.zeros((m, d, d)), quad)


def w_jet(germ: FixedPointGerm) -> MatrixJet2:
    """``A_tilde (1 - Phi)`` truncated at degree 2."""
    m = germ.m
    At = MatrixJet2.constant(germ.A_tilde, m)
    return At @ (MatrixJet2.identity(germ.d, m) - phi_jet(germ))


def curvature_bracket(germ: FixedPointGerm) -> float:
    """Curvature factor multiplying tr[wedge^p A_tilde] in b1.

    ``tau/6 + rho_kk/6 + R_iksh B_ki B_hs/3 + R_ikth B_kt B_hi/3
    - R_{k alpha h alpha} B_ks B_hs``; Latin indices normal, Greek tangent.
    """
    n = germ.n
    R = germ.R.components
    B = germ.B
    RN = R[n:, n:, n:, n:]
    tau = scalar_curvature(germ.R)
    rho_kk = float(np.einsum("kckc->", R[n:, :, n:, :]))
    t1 = float(np.einsum("iksh,ki,hs->", RN, B, B))
    t2 = float(np.einsum("ikth,kt,hi->", RN, B, B))
    mixed = np.einsum("kaha->kh", R[n:, :n, n:, :n])
    t3 = float(np.einsum("kh,ks,hs->", mixed, B, B))
    return tau / 6.0 + rho_kk / 6.0 + t1 / 3.0 + t2 / 3.0 - t3


def b0(germ: FixedPointGerm) -> float:
    """|det B| tr[wedge^p A_tilde]."""
    return germ.detB_abs * wedge_trace(germ.A_tilde, germ.p)


def b1(germ: FixedPointGerm) -> float:
    """|det B| {C + tr[wedge^p A_tilde] * curvature_bracket}."""
    return lc_result(germ).b1


def lc_result(germ: FixedPointGerm) -> HeatCoefficientResult:
    tr = wedge_trace(germ.A_tilde, germ.p)
    C = correction_C(germ) if germ.p > 0 else 0.0
    bracket = curvature_bracket(germ)
    return HeatCoefficientResult(
        "levi-civita",
        germ.detB_abs * tr,
        germ.detB_abs * (C + tr * bracket),
        {"detB_abs": germ.detB_abs, "wedge_trace": tr, "curvature_bracket": bracket,
         "correction": C},
    )


def heat_coefficients(germ: FixedPointGerm) -> list[HeatCoefficientResult]:
    """All variants applicable to ``germ``: Levi-Civita, plus the two torsion
    Laplacians when torsion data is present (the hat variant needs p >= 1)."""
    from . import torsion

    results = [lc_result(germ)]
    if germ.torsion is not None:
        results.append(torsion.bar_result(germ))
        if germ.p >= 1:
            results.append(torsion.hat_result(germ))
    return results
