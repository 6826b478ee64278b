"""b1 for the two Bochner Laplacians built from a metric connection with torsion.

* ``bar``: the Laplacian of the dual connection ``nabla* + Q*`` on forms.
* ``hat``: the Levi-Civita rough Laplacian with the ``nabla_{E_i} E_i``
  correction taken with respect to the torsion connection; it is a
  generalized Laplacian for the connection ``nabla - (1/2p)(Q(E_i)E_i)*``
  on 1-forms.

Both reuse :func:`~heatchar.coefficients.leibniz_box_trace` over the full
index range, since torsion perturbs tangent rows as well.  The jets built by
:func:`transport_jet` are the independent oracle for the derivative tensors.
"""

from __future__ import annotations

import math

import numpy as np

from .coefficients import (DerivativeTensors, HeatCoefficientResult, correction_C,
                           curvature_bracket, derivative_tensors_lc, leibniz_box_trace,
                           phi_jet)
from .errors import ArgumentError
from .jets import MatrixJet2
from .tensors import FixedPointGerm, scalar_curvature, wedge_trace


def _require_torsion(germ: FixedPointGerm):
    if germ.torsion is None:
        raise ArgumentError("germ carries no torsion data")
    return germ.torsion


def bar_connection(germ: FixedPointGerm) -> tuple[np.ndarray, np.ndarray]:
    """``L[k]_ij = Q_kji`` and ``dL[k, c]_ij = Q_kji,c`` of the dual connection."""
    tor = _require_torsion(germ)
    L = np.transpose(tor.Q, (0, 2, 1))
    dL = np.transpose(tor.dQ, (0, 3, 2, 1))
    return L, dL


def trace_vector(germ: FixedPointGerm) -> tuple[np.ndarray, np.ndarray]:
    """``q_k = sum_i Q_iik`` and ``dq[k, c] = sum_i Q_iik,c`` (full index range)."""
    tor = _require_torsion(germ)
    return np.einsum("iik->k", tor.Q), np.einsum("iikc->kc", tor.dQ)


def hat_connection(germ: FixedPointGerm) -> tuple[np.ndarray, np.ndarray]:
    """``L[k] = -(1/2p) q_k I`` and its normal derivatives."""
    p = germ.p
    if p < 1:
        raise ArgumentError("the hat torsion Laplacian needs p >= 1 (its connection has a 1/(2p) factor)")
    q, dq = trace_vector(germ)
    eye = np.eye(germ.d)
    L = -np.einsum("k,ab->kab", q, eye) / (2 * p)
    dL = -np.einsum("kc,ab->kcab", dq, eye) / (2 * p)
    return L, dL


def transport_jet(germ: FixedPointGerm, L: np.ndarray, dL: np.ndarray) -> MatrixJet2:
    """Degree-2 jet in ``y`` of the torsion transport correction.

    ``Id + y_j L(E_j) + dL(E_j)/dc_i y_j B_ik y_k + 1/2 L(E_i) L(E_j) y_i y_j
    - 1/2 dL(E_j)/dc_i y_i y_j`` with ``i, j, k`` normal.
    """
    d, n = germ.d, germ.n
    B = germ.B
    LN = L[n:]
    dLN = dL[n:, n:]                                   # [j, i] -> dL(E_j)/dc_i
    lin = LN.copy()
    quad = np.einsum("jiab,ik->jkab", dLN, B)
    quad = quad + 0.5 * np.einsum("iab,jbc->ijac", LN, LN)
    quad = quad - 0.5 * np.transpose(dLN, (1, 0, 2, 3))
    return MatrixJet2(np.eye(d), lin, quad)


def psibar_jet(germ: FixedPointGerm) -> MatrixJet2:
    L, dL = bar_connection(germ)
    return transport_jet(germ, L, dL)


def psihat_jet(germ: FixedPointGerm) -> MatrixJet2:
    L, dL = hat_connection(germ)
    return transport_jet(germ, L, dL)


def _w_with_transport(germ: FixedPointGerm, psi: MatrixJet2) -> MatrixJet2:
    m = germ.m
    At = MatrixJet2.constant(germ.A_tilde, m)
    return At @ (MatrixJet2.identity(germ.d, m) - phi_jet(germ)) @ psi


def wbar_jet(germ: FixedPointGerm) -> MatrixJet2:
    """``A_tilde e^{-Phi} Psibar`` truncated at degree 2."""
    return _w_with_transport(germ, psibar_jet(germ))


def what_jet(germ: FixedPointGerm) -> MatrixJet2:
    return _w_with_transport(germ, psihat_jet(germ))


def _derivative_tensors(germ: FixedPointGerm, L: np.ndarray, dL: np.ndarray) -> DerivativeTensors:
    """First and second y-derivatives of ``A_tilde e^{-Phi} Psi`` for a transport ``Psi``.

    ``D1[delta] = -A_tilde L(E_delta)`` (this sign convention is immaterial:
    D1 only enters through products of two factors) and
    ``D2[delta] = curvature part + A_tilde (2 dL(E_delta)/dc_j B_{j delta}
    + L(E_delta)^2 - dL(E_delta)/dc_delta)``.
    """
    n, m = germ.n, germ.m
    At = germ.A_tilde
    B = germ.B
    lc = derivative_tensors_lc(germ)
    D1 = np.empty_like(lc.D1)
    D2 = lc.D2.copy()
    for delta in range(m):
        k = n + delta
        D1[delta] = -At @ L[k]
        psi2 = (2.0 * np.einsum("jab,j->ab", dL[k, n:], B[:, delta])
                + L[k] @ L[k] - dL[k, k])
        D2[delta] += At @ psi2
    return DerivativeTensors(At, D1, D2)


def derivative_tensors_bar(germ: FixedPointGerm) -> DerivativeTensors:
    L, dL = bar_connection(germ)
    return _derivative_tensors(germ, L, dL)


def derivative_tensors_hat(germ: FixedPointGerm) -> DerivativeTensors:
    L, dL = hat_connection(germ)
    return _derivative_tensors(germ, L, dL)


def correction_Cbar(germ: FixedPointGerm) -> float:
    return leibniz_box_trace(derivative_tensors_bar(germ), germ.p, restrict_normal=False)


def correction_Chat(germ: FixedPointGerm) -> float:
    return leibniz_box_trace(derivative_tensors_hat(germ), germ.p, restrict_normal=False)


def correction_Chat_closed(germ: FixedPointGerm) -> float:
    """Closed form of the hat correction, using that its connection is scalar.

    ``C + tr[wedge^p A_tilde] sum_delta (binom(p,2)/(2p^2) q^2 + q^2/(4p)
    - sum_j q_{delta,j} B_{j delta} + q_{delta,delta}/2)``.
    """
    p, n, m = germ.p, germ.n, germ.m
    if p < 1:
        raise ArgumentError("the hat torsion Laplacian needs p >= 1")
    q, dq = trace_vector(germ)
    B = germ.B
    pair = math.comb(p, 2) / (2.0 * p * p)
    total = []
    for delta in range(m):
        k = n + delta
        total.append(pair * q[k] ** 2 + q[k] ** 2 / (4.0 * p)
                     - float(dq[k, n:] @ B[:, delta]) + 0.5 * dq[k, k])
    return correction_C(germ) + wedge_trace(germ.A_tilde, p) * math.fsum(total)


def b1_bar(germ: FixedPointGerm) -> float:
    return bar_result(germ).b1


def u1_hat_scalar(germ: FixedPointGerm) -> float:
    """``tau/6 - T_kjk,j / 2 - T_kjk T_ljl / 4`` (all indices over 1..d)."""
    tor = _require_torsion(germ)
    trace_T = np.einsum("kjk->j", tor.Tbar)
    div_T = float(np.einsum("kjkj->", tor.dTbar))
    return scalar_curvature(germ.R) / 6.0 - 0.5 * div_T - 0.25 * float(trace_T @ trace_T)


def b1_hat(germ: FixedPointGerm) -> float:
    return hat_result(germ).b1


def bar_result(germ: FixedPointGerm) -> HeatCoefficientResult:
    _require_torsion(germ)
    tr = wedge_trace(germ.A_tilde, germ.p)
    Cbar = correction_Cbar(germ) if germ.p > 0 else 0.0
    bracket = curvature_bracket(germ)
    return HeatCoefficientResult(
        "torsion-bar",
        germ.detB_abs * tr,
        germ.detB_abs * (Cbar + tr * bracket),
        {"detB_abs": germ.detB_abs, "wedge_trace": tr, "curvature_bracket": bracket,
         "correction": Cbar},
    )


def hat_result(germ: FixedPointGerm) -> HeatCoefficientResult:
    _require_torsion(germ)
    if germ.p < 1:
        raise ArgumentError("the hat torsion Laplacian needs p >= 1")
    tr = wedge_trace(germ.A_tilde, germ.p)
    Chat = correction_Chat(germ)
    bracket = curvature_bracket(germ)
    u1 = u1_hat_scalar(germ)
    tau = scalar_curvature(germ.R)
    return HeatCoefficientResult(
        "torsion-hat",
        germ.detB_abs * tr,
        germ.detB_abs * (Chat + tr * (bracket - tau / 6.0 + u1)),
        {"detB_abs": germ.detB_abs, "wedge_trace": tr, "curvature_bracket": bracket,
         "correction": Chat, "u1_hat": u1},
    )
