"""Pointwise tensor data at a fixed point and exterior-algebra traces.

Index convention: documentation and configuration files count frame
directions from 1, arrays count from 0.  Only :func:`to_internal` and
:func:`to_external` translate between the two.  Tangent directions of the
fixed submanifold come first (internal ``0..n-1``), normal directions last
(internal ``n..d-1``).  Blocks indexed by normal directions only (``A``,
``B``) use block-local positions ``0..m-1`` with ``m = d - n``; global
normal index ``i`` corresponds to local index ``i - n``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, ValidationError

CURVATURE_TOL = 1e-12
ORTHOGONALITY_TOL = 1e-10
SINGULAR_TOL = 1e-12
MAX_WEDGE_DEGREE = 12
MAX_WEDGE_DIM = 16


def to_internal(index: int) -> int:
    """Convert a 1-based frame index to an array position."""
    if index < 1:
        raise ArgumentError(f"frame indices start at 1, got {index}")
    return index - 1


def to_external(index: int) -> int:
    return index + 1


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


# --------------------------------------------------------------------------
# permutations and exterior powers
# --------------------------------------------------------------------------

def permutation_parity(perm: Sequence[int]) -> int:
    """Sign of a permutation of ``0..k-1`` given as a sequence."""
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def gen_kronecker(upper: Sequence[int], lower: Sequence[int]) -> int:
    """Generalized Kronecker symbol.

    Returns +1 (-1) when ``lower`` is an even (odd) rearrangement of
    ``upper`` and all entries are distinct; 0 otherwise.
    """
    upper = list(upper)
    lower = list(lower)
    if len(upper) != len(lower):
        raise ArgumentError(
            f"index lists differ in length ({len(upper)} vs {len(lower)})")
    if len(set(upper)) != len(upper) or sorted(upper) != sorted(lower):
        return 0
    position = {v: k for k, v in enumerate(upper)}
    return permutation_parity([position[v] for v in lower])


def _check_wedge_args(M: np.ndarray, p: int) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ArgumentError(f"expected a square matrix, got shape {M.shape}")
    d = M.shape[0]
    if not 0 <= p <= d:
        raise ArgumentError(f"degree p={p} outside 0..{d}")
    if p > MAX_WEDGE_DEGREE or d > MAX_WEDGE_DIM:
        raise ArgumentError(
            f"wedge trace refused for p={p}, d={d} "
            f"(limits p<={MAX_WEDGE_DEGREE}, d<={MAX_WEDGE_DIM})")
    return M


def wedge_trace(M, p: int) -> float:
    """tr(wedge^p M) as the sum of all p x p principal minors."""
    M = _check_wedge_args(M, p)
    if p == 0:
        return 1.0
    return math.fsum(float(np.linalg.det(M[np.ix_(idx, idx)]))
                     for idx in itertools.combinations(range(M.shape[0]), p))


def wedge_trace_charpoly(M, p: int) -> float:
    """tr(wedge^p M) read off the characteristic polynomial.

    ``det(x I - M) = sum_k (-1)^k e_k x^(d-k)``; used as a cross-check of
    :func:`wedge_trace`.
    """
    M = _check_wedge_args(M, p)
    coeffs = np.poly(M) if M.shape[0] else np.array([1.0])
    return float(np.real((-1) ** p * coeffs[p]))


def _leading_identity_size(M: np.ndarray) -> int:
    d = M.shape[0]
    n = 0
    while n < d:
        k = n + 1
        block_ok = np.allclose(M[:k, :k], np.eye(k), atol=ORTHOGONALITY_TOL)
        off_ok = (np.allclose(M[:k, k:], 0.0, atol=ORTHOGONALITY_TOL)
                  and np.allclose(M[k:, :k], 0.0, atol=ORTHOGONALITY_TOL))
        if not (block_ok and off_ok):
            break
        n = k
    return n


def wedge_trace_kronecker(M, p: int, n: int | None = None) -> float:
    """tr(wedge^p M) for ``M = blockdiag(I_n, A^t)`` by explicit epsilon sums.

    The sum runs over the number ``p1`` of normal slots, increasing normal
    index tuples ``i_1 < ... < i_p1`` and their rearrangements ``l``,
    weighting ``A_{i_1 l_1} ... A_{i_p1 l_p1}`` by the Kronecker symbol.
    Each normal tuple is paired with ``binomial(n, p - p1)`` choices of
    tangent slots, on which ``M`` acts as the identity.

    ``n`` defaults to the size of the largest leading identity block.
    """
    M = _check_wedge_args(M, p)
    d = M.shape[0]
    if n is None:
        n = _leading_identity_size(M)
    elif not 0 <= n <= d:
        raise ArgumentError(f"tangent dimension n={n} outside 0..{d}")
    tangent_ok = np.allclose(M[:n, :n], np.eye(n), atol=ORTHOGONALITY_TOL)
    off_ok = (np.allclose(M[:n, n:], 0.0, atol=ORTHOGONALITY_TOL)
              and np.allclose(M[n:, :n], 0.0, atol=ORTHOGONALITY_TOL))
    if not (tangent_ok and off_ok):
        raise ArgumentError("matrix is not of the form blockdiag(I_n, A^t)")
    A = M[n:, n:].T
    m = d - n
    total = []
    for p1 in range(max(0, p - n), min(p, m) + 1):
        mult = math.comb(n, p - p1)
        for idx in itertools.combinations(range(m), p1):
            for lower in itertools.permutations(idx):
                eps = gen_kronecker(idx, lower)
                prod = 1.0
                for i, l in zip(idx, lower):
                    prod *= A[i, l]
                total.append(mult * eps * prod)
    return math.fsum(total)


# --------------------------------------------------------------------------
# curvature
# --------------------------------------------------------------------------

def curvature_symmetry_defects(R: np.ndarray) -> dict[str, float]:
    """Max-norm violation of each algebraic curvature symmetry."""
    return {
        "antisymmetry_first_pair": float(np.max(np.abs(R + R.transpose(1, 0, 2, 3)), initial=0.0)),
        "antisymmetry_second_pair": float(np.max(np.abs(R + R.transpose(0, 1, 3, 2)), initial=0.0)),
        "pair_symmetry": float(np.max(np.abs(R - R.transpose(2, 3, 0, 1)), initial=0.0)),
        "first_bianchi": float(np.max(np.abs(
            R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)), initial=0.0)),
    }


@dataclass(frozen=True)
class CurvatureTensor:
    """Frame components ``R[a, b, c, e]`` of the Riemann tensor at a point."""

    components: np.ndarray
    tol: float = CURVATURE_TOL

    def __post_init__(self):
        R = np.array(self.components, dtype=float)
        if R.ndim != 4 or len(set(R.shape)) != 1:
            raise ValidationError(f"curvature must be d x d x d x d, got {R.shape}")
        bad = {k: v for k, v in curvature_symmetry_defects(R).items() if v > self.tol}
        if bad:
            raise ValidationError(f"curvature symmetries violated: {bad}")
        object.__setattr__(self, "components", _frozen(R))

    @property
    def d(self) -> int:
        return self.components.shape[0]

    @property
    def scalar(self) -> float:
        return scalar_curvature(self)

    @property
    def ricci(self) -> np.ndarray:
        return ricci(self)

    @classmethod
    def zeros(cls, d: int) -> "CurvatureTensor":
        return cls(np.zeros((d,) * 4))

    @classmethod
    def constant(cls, d: int, kappa: float = 1.0) -> "CurvatureTensor":
        """Space form of sectional curvature ``kappa``."""
        g = np.eye(d)
        R = kappa * (np.einsum("ac,be->abce", g, g) - np.einsum("ae,bc->abce", g, g))
        return cls(R)

    @classmethod
    def unit_sphere2(cls) -> "CurvatureTensor":
        return cls.constant(2, 1.0)

    @classmethod
    def from_components(cls, d: int, entries: Iterable[tuple[int, int, int, int, float]],
                        tol: float = CURVATURE_TOL) -> "CurvatureTensor":
        """Complete a sparse list of 1-based components by symmetry.

        Each entry ``(a, b, c, e, value)`` must satisfy ``a < b``, ``c < e``
        and ``(a, b) <= (c, e)``.  The first Bianchi identity is not imposed;
        input violating it is rejected by validation.
        """
        R = np.zeros((d,) * 4)
        for a, b, c, e, value in entries:
            if not (a < b and c < e and (a, b) <= (c, e)):
                raise ArgumentError(f"component ({a},{b},{c},{e}) is not in canonical order")
            a, b, c, e = (to_internal(x) for x in (a, b, c, e))
            if max(a, b, c, e) >= d:
                raise ArgumentError(f"component index exceeds dimension {d}")
            for (w, x, y, z), sign in (((a, b, c, e), 1), ((b, a, c, e), -1),
                                       ((a, b, e, c), -1), ((b, a, e, c), 1)):
                R[w, x, y, z] = sign * value
                R[y, z, w, x] = sign * value
        return cls(R, tol=tol)


def scalar_curvature(R: CurvatureTensor) -> float:
    """tau_0 = sum_{a,b} R_abab."""
    return float(np.einsum("abab->", R.components))


def ricci(R: CurvatureTensor) -> np.ndarray:
    """rho_ab = sum_c R_acbc."""
    return np.einsum("acbc->ab", R.components)


# --------------------------------------------------------------------------
# torsion
# --------------------------------------------------------------------------

def contorsion(Tbar) -> np.ndarray:
    """Contorsion ``Q_ijk = (Tbar_ijk + Tbar_kij + Tbar_kji) / 2``.

    ``Tbar`` must be skew in its first two slots.  Extra trailing axes
    (e.g. a derivative direction) are carried along unchanged.
    """
    T = np.asarray(Tbar, dtype=float)
    if T.ndim < 3:
        raise ArgumentError(f"torsion needs at least 3 axes, got {T.ndim}")
    skew = np.max(np.abs(T + np.swapaxes(T, 0, 1)), initial=0.0)
    if skew > CURVATURE_TOL:
        raise ValidationError(f"torsion is not skew in its first two slots (defect {skew:.3e})")
    rest = tuple(range(3, T.ndim))
    kij = np.transpose(T, (1, 2, 0) + rest)   # [i,j,k] -> T[k,i,j]
    kji = np.transpose(T, (2, 1, 0) + rest)   # [i,j,k] -> T[k,j,i]
    return 0.5 * (T + kij + kji)


def torsion_from_contorsion(Q) -> np.ndarray:
    """Inverse of :func:`contorsion`: ``Tbar_ijk = Q_ijk - Q_jik``."""
    Q = np.asarray(Q, dtype=float)
    return Q - np.swapaxes(Q, 0, 1)


@dataclass(frozen=True)
class TorsionData:
    """Torsion ``Tbar``, its contorsion ``Q`` and ``dQ[i,j,k,l] = Q_ijk,l``."""

    Tbar: np.ndarray
    Q: np.ndarray
    dQ: np.ndarray

    def __post_init__(self):
        T, Q, dQ = (np.array(x, dtype=float) for x in (self.Tbar, self.Q, self.dQ))
        d = T.shape[0]
        if T.shape != (d,) * 3 or Q.shape != (d,) * 3 or dQ.shape != (d,) * 4:
            raise ValidationError(
                f"inconsistent torsion shapes {T.shape}, {Q.shape}, {dQ.shape}")
        if np.max(np.abs(Q - contorsion(T)), initial=0.0) > CURVATURE_TOL:
            raise ValidationError("Q does not match the contorsion of Tbar")
        skew = np.max(np.abs(dQ + dQ.transpose(0, 2, 1, 3)), initial=0.0)
        if skew > CURVATURE_TOL:
            raise ValidationError(f"dQ is not skew in slots 2,3 (defect {skew:.3e})")
        for name, arr in (("Tbar", T), ("Q", Q), ("dQ", dQ)):
            object.__setattr__(self, name, _frozen(arr))

    @property
    def d(self) -> int:
        return self.Tbar.shape[0]

    @property
    def dTbar(self) -> np.ndarray:
        """``dTbar[i,j,k,l] = Tbar_ijk,l``."""
        return torsion_from_contorsion(self.dQ)

    @classmethod
    def from_tbar(cls, Tbar, dTbar=None) -> "TorsionData":
        T = np.asarray(Tbar, dtype=float)
        d = T.shape[0]
        dT = np.zeros((d,) * 4) if dTbar is None else np.asarray(dTbar, dtype=float)
        return cls(T, contorsion(T), contorsion(dT))

    @classmethod
    def from_contorsion(cls, Q, dQ=None) -> "TorsionData":
        Q = np.asarray(Q, dtype=float)
        d = Q.shape[0]
        dQ = np.zeros((d,) * 4) if dQ is None else np.asarray(dQ, dtype=float)
        return cls(torsion_from_contorsion(Q), Q, dQ)

    @classmethod
    def zeros(cls, d: int) -> "TorsionData":
        return cls.from_tbar(np.zeros((d,) * 3))


# --------------------------------------------------------------------------
# normal isometry and germ
# --------------------------------------------------------------------------

def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def block_rotation(angles: Sequence[float]) -> np.ndarray:
    """Block-diagonal matrix of 2 x 2 rotations."""
    m = 2 * len(angles)
    A = np.zeros((m, m))
    for k, theta in enumerate(angles):
        A[2 * k:2 * k + 2, 2 * k:2 * k + 2] = rotation(theta)
    return A


@dataclass(frozen=True)
class NormalIsometry:
    """Differential ``A`` of the isometry on the normal fibre and ``B = (I - A)^-1``."""

    A: np.ndarray
    B: np.ndarray = field(init=False)
    detB_abs: float = field(init=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidationError(f"A must be square, got shape {A.shape}")
        m = A.shape[0]
        err = np.max(np.abs(A.T @ A - np.eye(m)), initial=0.0)
        if err >= ORTHOGONALITY_TOL:
            raise ValidationError(f"A is not orthogonal (defect {err:.3e})")
        I_minus_A = np.eye(m) - A
        det = float(np.linalg.det(I_minus_A)) if m else 1.0
        if abs(det) < SINGULAR_TOL:
            raise ValidationError("I - A is singular: A has eigenvalue 1 on the normal fibre")
        B = np.linalg.solve(I_minus_A, np.eye(m)) if m else np.zeros((0, 0))
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "B", _frozen(B))
        object.__setattr__(self, "detB_abs", 1.0 / abs(det))

    @property
    def m(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class FixedPointGerm:
    """Everything the first two heat coefficients need at a fixed point."""

    d: int
    n: int
    p: int
    iso: NormalIsometry
    R: CurvatureTensor
    torsion: TorsionData | None = None

    def __post_init__(self):
        if not 0 <= self.n < self.d:
            raise ValidationError(f"need 0 <= n < d, got n={self.n}, d={self.d}")
        if not 0 <= self.p <= self.d:
            raise ValidationError(f"form degree p={self.p} outside 0..{self.d}")
        if self.iso.m != self.d - self.n:
            raise ValidationError(
                f"normal isometry has size {self.iso.m}, expected {self.d - self.n}")
        if self.R.d != self.d:
            raise ValidationError(f"curvature dimension {self.R.d} != {self.d}")
        if self.torsion is not None and self.torsion.d != self.d:
            raise ValidationError(f"torsion dimension {self.torsion.d} != {self.d}")

    @property
    def m(self) -> int:
        return self.d - self.n

    @property
    def A(self) -> np.ndarray:
        return self.iso.A

    @property
    def B(self) -> np.ndarray:
        return self.iso.B

    @property
    def detB_abs(self) -> float:
        return self.iso.detB_abs

    @property
    def A_tilde(self) -> np.ndarray:
        """blockdiag(I_n, A^t)."""
        At = np.eye(self.d)
        At[self.n:, self.n:] = self.iso.A.T
        return At

    def with_degree(self, p: int) -> "FixedPointGerm":
        return FixedPointGerm(self.d, self.n, p, self.iso, self.R, self.torsion)

    def with_torsion(self, torsion: TorsionData | None) -> "FixedPointGerm":
        return FixedPointGerm(self.d, self.n, self.p, self.iso, self.R, torsion)

    def with_curvature(self, R: CurvatureTensor) -> "FixedPointGerm":
        return FixedPointGerm(self.d, self.n, self.p, self.iso, R, self.torsion)

    @classmethod
    def build(cls, A, p: int, R: CurvatureTensor | None = None, n: int = 0,
              torsion: TorsionData | None = None) -> "FixedPointGerm":
        A = np.asarray(A, dtype=float)
        d = n + A.shape[0]
        return cls(d, n, p, NormalIsometry(A), R if R is not None else CurvatureTensor.zeros(d),
                   torsion)


def sphere2_germ(theta: float, p: int) -> FixedPointGerm:
    """Germ of the rotation by ``theta`` of the unit 2-sphere at a pole."""
    return FixedPointGerm.build(rotation(theta), p, CurvatureTensor.unit_sphere2())
