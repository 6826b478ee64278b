"""Exact equivariant spectra of model geometries and small-time coefficient fits.

A :class:`SpectralModel` enumerates levels ``(eigenvalue, Tr T*|level)`` and
bounds the discarded tail, so :func:`heat_trace` can sum
``sum_lambda Tr(T*_lambda) e^{-t lambda}`` to a requested accuracy.
:func:`extract_coefficients` then fits ``(4 pi t)^(-n/2) sum_k c_k t^k`` to
samples at small ``t``; ``c_k`` is the sum over fixed components of the
integrated local coefficients ``b_k``.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ArgumentError, FitError, ModelError, ResourceError

DEFAULT_T0 = 1e-4
DEFAULT_Q = math.sqrt(2.0)
DEFAULT_SAMPLES = 12
DEFAULT_K = 3
DEFAULT_EPS = 1e-13
MAX_CONDITION = 1e12
LEVEL_BUDGET = 2_000_000


@dataclass(frozen=True)
class SpectralModel:
    """An enumerable equivariant spectrum.

    ``level(i)`` returns the i-th ``(eigenvalue, trace)`` pair, eigenvalues
    non-decreasing in ``i``.  ``tail_bound(L, t)`` bounds
    ``sum_{i >= L} |trace_i| e^{-t eigenvalue_i}``.  Finite models set
    ``n_levels``; closed-form test models set ``closed_form`` instead.
    """

    name: str
    n_N: int
    level: Callable[[int], tuple[float, float]] | None = None
    tail_bound: Callable[[int, float], float] | None = None
    n_levels: int | None = None
    closed_form: Callable[[float], float] | None = None
    params: dict = field(default_factory=dict)

    def levels(self, count: int) -> list[tuple[float, float]]:
        if self.n_levels is not None:
            count = min(count, self.n_levels)
        return [self.level(i) for i in range(count)]


@dataclass(frozen=True)
class TraceSample:
    t: float
    F: float
    cutoff: int
    tail_bound: float


@dataclass(frozen=True)
class AsymptoticFit:
    n_N: int
    coefficients: tuple[float, ...]
    residual: float
    condition: float
    grid: dict
    samples: tuple[TraceSample, ...] = ()

    def __getitem__(self, k: int) -> float:
        return self.coefficients[k]


# --------------------------------------------------------------------------
# summation
# --------------------------------------------------------------------------

def heat_trace_sample(model: SpectralModel, t: float, eps: float = DEFAULT_EPS,
                      budget: int = LEVEL_BUDGET) -> TraceSample:
    if t <= 0 or eps <= 0:
        raise ArgumentError(f"need t > 0 and eps > 0, got t={t}, eps={eps}")
    if model.closed_form is not None:
        return TraceSample(t, float(model.closed_form(t)), 0, 0.0)
    if model.n_levels is not None:
        cutoff, tail = model.n_levels, 0.0
    else:
        cutoff = 16
        while model.tail_bound(cutoff, t) >= eps:
            cutoff *= 2
            if cutoff > budget:
                raise ResourceError(
                    f"{model.name}: t={t:.3e} needs more than {budget} levels for "
                    f"eps={eps:.1e} (tail bound at {budget}: {model.tail_bound(budget, t):.3e})")
        lo, hi = cutoff // 2, cutoff
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if model.tail_bound(mid, t) < eps:
                hi = mid
            else:
                lo = mid
        cutoff, tail = hi, model.tail_bound(hi, t)
    terms = []
    for lam, tr in model.levels(cutoff):
        terms.append(tr * math.exp(-t * lam))
    return TraceSample(t, math.fsum(terms), cutoff, tail)


def heat_trace(model: SpectralModel, t: float, eps: float = DEFAULT_EPS) -> float:
    """``sum_lambda Tr(T*_lambda) e^{-t lambda}`` with discarded tail below ``eps``."""
    return heat_trace_sample(model, t, eps).F


def write_samples_csv(samples: Sequence[TraceSample], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["t", "F", "cutoff", "tail_bound"])
    for s in samples:
        writer.writerow([f"{s.t:.12e}", f"{s.F:.12e}", s.cutoff, f"{s.tail_bound:.12e}"])


# --------------------------------------------------------------------------
# fitting
# --------------------------------------------------------------------------

def fit_series(F: Callable[[float], float], n_N: int, K: int = DEFAULT_K,
               t0: float = DEFAULT_T0, q: float = DEFAULT_Q,
               samples: int = DEFAULT_SAMPLES) -> AsymptoticFit:
    """Fit ``F(t) ~ (4 pi t)^(-n/2) sum_{k<=K} c_k t^k`` on ``t_j = t0 q^j``.

    Least squares on ``(4 pi t)^(n/2) F(t)`` with rows weighted by ``1/t``.
    """
    if not 0 <= K <= 3:
        raise ArgumentError(f"K must be in 0..3, got {K}")
    if samples <= K:
        raise ArgumentError(f"need more than K={K} samples, got {samples}")
    ts = t0 * q ** np.arange(samples)
    values = np.array([F(t) for t in ts])
    return _fit(ts, values, n_N, K, {"t0": t0, "q": q, "samples": samples, "K": K})


def _fit(ts, values, n_N, K, grid, sample_records=()) -> AsymptoticFit:
    y = (4 * np.pi * ts) ** (n_N / 2) * values
    # columns in s = t / t_max; c_k = a_k / t_max^k undoes the scaling exactly
    t_ref = float(ts.max())
    V = np.vander(ts / t_ref, K + 1, increasing=True)
    w = t_ref / ts
    Aw = V * w[:, None]
    cond = float(np.linalg.cond(Aw))
    if cond > MAX_CONDITION:
        raise FitError(f"fit design matrix condition number {cond:.3e} exceeds "
                       f"{MAX_CONDITION:.0e}; widen the grid (larger q or t0) or lower K")
    # fitting y - y[0] keeps constant data exact; the shift returns in c_0
    shift = float(y[0])
    rhs = (y - shift) * w
    scaled, *_ = np.linalg.lstsq(Aw, rhs, rcond=None)
    residual = float(np.linalg.norm(Aw @ scaled - rhs)) / t_ref
    coef = scaled / t_ref ** np.arange(K + 1)
    coef[0] += shift
    return AsymptoticFit(n_N, tuple(float(c) for c in coef), residual, cond, grid,
                         tuple(sample_records))


def extract_coefficients(model: SpectralModel, K: int = DEFAULT_K, t0: float = DEFAULT_T0,
                         q: float = DEFAULT_Q, samples: int = DEFAULT_SAMPLES,
                         eps: float = DEFAULT_EPS) -> AsymptoticFit:
    if not 0 <= K <= 3:
        raise ArgumentError(f"K must be in 0..3, got {K}")
    if samples <= K:
        raise ArgumentError(f"need more than K={K} samples, got {samples}")
    ts = t0 * q ** np.arange(samples)
    recs = [heat_trace_sample(model, float(t), eps) for t in ts]
    values = np.array([r.F for r in recs])
    grid = {"t0": t0, "q": q, "samples": samples, "K": K, "eps": eps}
    return _fit(ts, values, model.n_N, K, grid, recs)


# --------------------------------------------------------------------------
# sphere models
# --------------------------------------------------------------------------

def rotation_character(l: int, theta: float) -> float:
    """Trace of the rotation by ``theta`` on degree-``l`` spherical harmonics."""
    return math.sin((l + 0.5) * theta) / math.sin(0.5 * theta)


def _check_angle(theta: float):
    if not 0 < theta < 2 * math.pi:
        raise ArgumentError(f"rotation angle must lie in (0, 2pi), got {theta}")


def _sphere_model(name: str, theta: float, lmin: int, mult: float, shift: float) -> SpectralModel:
    """Levels ``l(l+1) - shift`` (``l >= lmin``) with trace ``mult * chi_l(theta)``."""
    _check_angle(theta)

    def level(i: int) -> tuple[float, float]:
        l = i + lmin
        return l * (l + 1) - shift, mult * rotation_character(l, theta)

    def tail(L: int, t: float) -> float:
        # sum_{l >= l0} (2l+1) e^{-l(l+1)t} <= f(l0) + int_{l0}^inf f, f decreasing
        l0 = L + lmin
        if (2 * l0 + 1) ** 2 * t < 2:
            return math.inf
        head = math.exp(-l0 * (l0 + 1) * t)
        return mult * math.exp(shift * t) * ((2 * l0 + 1) * head + head / t)

    return SpectralModel(name, 0, level, tail, params={"theta": theta})


def sphere_rotation_functions(theta: float) -> SpectralModel:
    """Scalar Laplacian on the unit 2-sphere, rotation by ``theta`` (two isolated fixed points)."""
    return _sphere_model("sphere_functions", theta, 0, 1.0, 0.0)


def sphere_rotation_oneforms_bochner(theta: float) -> SpectralModel:
    """Bochner Laplacian on 1-forms of the unit 2-sphere.

    The Hodge Laplacian on 1-forms has eigenforms ``d H_l`` and ``*d H_l``
    (``l >= 1``), both with eigenvalue ``l(l+1)``; ``d`` and ``*`` commute
    with the rotation, so each copy carries the scalar character.  On the
    unit sphere Ric = identity, so the Bochner eigenvalue is ``l(l+1) - 1``.
    """
    return _sphere_model("sphere_oneforms_bochner", theta, 1, 2.0, 1.0)


def sphere_rotation_hodge(theta: float, p: int) -> SpectralModel:
    """Hodge Laplacian on p-forms of the unit 2-sphere (p = 2 via the Hodge star)."""
    if p in (0, 2):
        model = _sphere_model("sphere_hodge", theta, 0, 1.0, 0.0)
    elif p == 1:
        model = _sphere_model("sphere_hodge", theta, 1, 2.0, 0.0)
    else:
        raise ArgumentError(f"2-sphere has forms of degree 0..2, got p={p}")
    model.params["p"] = p
    return model


def synthetic_model(coefficients: Sequence[float], n_N: int = 0) -> SpectralModel:
    """Closed-form ``F(t) = (4 pi t)^(-n/2) sum_k c_k t^k`` for testing the fit."""
    coeffs = tuple(float(c) for c in coefficients)

    def F(t: float) -> float:
        return (4 * math.pi * t) ** (-n_N / 2) * sum(c * t ** k for k, c in enumerate(coeffs))

    return SpectralModel("synthetic", n_N, closed_form=F, params={"coefficients": list(coeffs)})


# --------------------------------------------------------------------------
# flat tori
# --------------------------------------------------------------------------

def _wedge_basis(d: int, p: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(d), p))


def _wedge_of_vectors(vectors: Sequence[np.ndarray], basis_index: dict) -> np.ndarray:
    """Coordinates of ``v_1 ^ ... ^ v_p`` in the increasing-index basis."""
    out = np.zeros(len(basis_index))
    p = len(vectors)
    if p == 0:
        out[0] = 1.0
        return out
    d = len(vectors[0])
    for js in itertools.product(range(d), repeat=p):
        if len(set(js)) < p:
            continue
        coef = 1.0
        for v, j in zip(vectors, js):
            coef *= v[j]
        if coef == 0.0:
            continue
        order = sorted(range(p), key=lambda s: js[s])
        inversions = sum(1 for a in range(p) for b in range(a + 1, p) if order[a] > order[b])
        out[basis_index[tuple(sorted(js))]] += (-1) ** inversions * coef
    return out


def induced_on_forms(M: np.ndarray, p: int, derivation: bool = False) -> np.ndarray:
    """Matrix of ``M`` on p-forms in the basis ``e^I``, ``I`` increasing.

    ``M[:, j]`` is the image of ``e^j``.  As an algebra map ``e^I`` goes to
    the wedge of the images; as a derivation, to the sum over slots with one
    factor replaced by its image.
    """
    d = M.shape[0]
    basis = _wedge_basis(d, p)
    index = {I: k for k, I in enumerate(basis)}
    eye = np.eye(d)
    out = np.zeros((len(basis), len(basis)))
    for k, I in enumerate(basis):
        if derivation:
            col = np.zeros(len(basis))
            for s in range(p):
                vecs = [M[:, i] if r == s else eye[:, i] for r, i in enumerate(I)]
                col += _wedge_of_vectors(vecs, index)
            out[:, k] = col
        else:
            out[:, k] = _wedge_of_vectors([M[:, i] for i in I], index)
    return out


def _check_lattice_isometry(Rmat) -> np.ndarray:
    R = np.asarray(Rmat, dtype=float)
    d = R.shape[0]
    if R.shape != (d, d):
        raise ArgumentError(f"lattice map must be square, got {R.shape}")
    if not np.allclose(R, np.round(R)) or not np.allclose(R.T @ R, np.eye(d)):
        raise ArgumentError("lattice map must be an orthogonal integer matrix")
    if abs(np.linalg.det(np.eye(d) - R)) < 0.5:
        raise ArgumentError("det(I - R) = 0: fixed points are not isolated")
    return np.round(R)


def fixed_dual_vectors(Rmat, radius: int) -> list[tuple[int, ...]]:
    """Integer ``k`` with ``|k_i| <= radius`` and ``R^T k = k`` (brute force)."""
    R = np.asarray(Rmat, dtype=int)
    d = R.shape[0]
    return [k for k in itertools.product(range(-radius, radius + 1), repeat=d)
            if np.array_equal(R.T @ np.array(k), np.array(k))]


def pullback_on_forms(Rmat, p: int) -> np.ndarray:
    """``T*`` on constant p-forms for ``T(x) = R x + v``: ``T* e^j = sum_i R_ji e^i``."""
    R = np.asarray(Rmat, dtype=float)
    return induced_on_forms(R.T, p)


def torus_lattice_isometry(d: int, Rmat, v=None, p: int = 0) -> SpectralModel:
    """Flat torus ``R^d / Z^d`` with ``T(x) = R x + v`` acting on p-forms.

    ``T*`` maps the Fourier mode ``k`` to ``R^T k``, so only modes with
    ``R^T k = k`` contribute, each with phase ``e^{2 pi i k.v}`` and weight
    ``tr[wedge^p R^T]``.  With ``det(I - R) != 0`` only ``k = 0`` is fixed
    and the trace is the constant ``tr[wedge^p R^T]``.
    """
    R = _check_lattice_isometry(Rmat)
    if R.shape[0] != d:
        raise ArgumentError(f"lattice map has size {R.shape[0]}, expected {d}")
    if not 0 <= p <= d:
        raise ArgumentError(f"form degree p={p} outside 0..{d}")
    v = np.zeros(d) if v is None else np.asarray(v, dtype=float)
    trace = float(np.trace(pullback_on_forms(R, p)))
    n_fixed = int(round(abs(np.linalg.det(np.eye(d) - R))))
    return SpectralModel(
        "torus_isometry", 0, level=lambda i: (0.0, trace), tail_bound=lambda L, t: 0.0,
        n_levels=1,
        params={"d": d, "R": R.tolist(), "v": v.tolist(), "p": p, "fixed_points": n_fixed})


def contorsion_invariant(Rmat, Q, tol: float = 1e-12) -> bool:
    """Whether ``Q_ijk = R_ai R_bj R_ck Q_abc``."""
    R = np.asarray(Rmat, dtype=float)
    moved = np.einsum("ai,bj,ck,abc->ijk", R, R, R, np.asarray(Q, dtype=float))
    return bool(np.max(np.abs(moved - Q)) <= tol)


def torsion_connection_on_forms(Q, p: int) -> list[np.ndarray]:
    """Matrices of the torsion part of the dual connection on p-forms.

    On 1-forms ``nabla*_{E_k} e^j = -sum_i Q_kij e^i`` in a parallel frame;
    the action extends to p-forms as a derivation.
    """
    Q = np.asarray(Q, dtype=float)
    d = Q.shape[0]
    return [induced_on_forms(-Q[k], p, derivation=True) for k in range(d)]


def torus_constant_torsion(d: int, Rmat, Qconst, p: int, v=None,
                           require_invariant: bool = False) -> SpectralModel:
    """Flat torus with the Bochner Laplacian of a constant-contorsion connection.

    On the Fourier mode ``k`` the operator is the finite Hermitian matrix
    ``M(k) = -sum_j (2 pi i k_j + N_j)^2`` with ``N_j`` the (skew) connection
    matrices on p-forms.  Only ``k = 0`` is fixed by ``R^T``; its levels are
    the eigenvalues of ``M(0)`` with weights ``<u, T* u>`` over an orthonormal
    eigenbasis, so ``sum_j w_j e^{-t lambda_j} = tr(T* e^{-t M(0)})`` whether
    or not ``T*`` commutes with ``M(0)``.
    """
    R = _check_lattice_isometry(Rmat)
    Q = np.asarray(Qconst, dtype=float)
    if R.shape[0] != d or Q.shape != (d, d, d):
        raise ArgumentError(f"shapes {R.shape}, {Q.shape} inconsistent with d={d}")
    if np.max(np.abs(Q + Q.transpose(0, 2, 1))) > 1e-12:
        raise ArgumentError("contorsion must be skew in its last two slots")
    if require_invariant and not contorsion_invariant(R, Q):
        raise ArgumentError("contorsion is not invariant under the lattice map")
    N = torsion_connection_on_forms(Q, p)
    M0 = -sum(Nj @ Nj for Nj in N)
    asym = float(np.max(np.abs(M0 - M0.T), initial=0.0))
    if asym > 1e-10:
        raise ModelError(f"mode operator is not symmetric (defect {asym:.3e})")
    lam, U = np.linalg.eigh(0.5 * (M0 + M0.T))
    P = pullback_on_forms(R, p)
    weights = np.einsum("ij,ik,kj->j", U, P, U)
    order = np.argsort(lam)
    lev = [(float(lam[j]), float(weights[j])) for j in order]
    n_fixed = int(round(abs(np.linalg.det(np.eye(d) - R))))
    v = np.zeros(d) if v is None else np.asarray(v, dtype=float)
    return SpectralModel(
        "torus_torsion", 0, level=lambda i: lev[i], tail_bound=lambda L, t: 0.0,
        n_levels=len(lev),
        params={"d": d, "R": R.tolist(), "v": v.tolist(), "p": p, "fixed_points": n_fixed})


def torus_hodge(d: int, Rmat, v=None, p: int = 0) -> SpectralModel:
    """Hodge Laplacian on p-forms of the flat torus (same spectrum as the Bochner one)."""
    model = torus_lattice_isometry(d, Rmat, v, p)
    return SpectralModel("torus_hodge", 0, model.level, model.tail_bound, model.n_levels,
                         params=model.params)
