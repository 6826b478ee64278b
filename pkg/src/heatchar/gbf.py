"""Equivariant heat traces of the nonminimal operator ``D = a^2 d delta + b^2 delta d``.

``T*`` preserves the Hodge decomposition, so the trace on p-forms splits
into the harmonic part ``beta_p``, the exact part ``f(t, d^(p))`` and the
coexact part ``f(t, delta^(p))``; ``D`` rescales time by ``a^2`` on the
exact part and by ``b^2`` on the coexact part.  Matching powers of ``t``
relates the heat coefficients of ``D`` to those of the Hodge Laplacians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import spectral
from .errors import ArgumentError, ModelError
from .spectral import SpectralModel, heat_trace

FORM_IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class HodgeTraceTable:
    """Hodge-Laplacian trace models and harmonic traces for degrees ``0..p_max``."""

    name: str
    n_N: int
    models: tuple[SpectralModel, ...]
    betas: tuple[float, ...]
    eps: float = spectral.DEFAULT_EPS

    @property
    def p_max(self) -> int:
        return len(self.models) - 1

    def f(self, t: float, j: int) -> float:
        """``f_T(t, Laplacian^(j))``."""
        self._require(j)
        return heat_trace(self.models[j], t, self.eps)

    def beta(self, j: int) -> float:
        self._require(j)
        return self.betas[j]

    def _require(self, j: int):
        if not 0 <= j <= self.p_max:
            raise ArgumentError(f"table {self.name} has degrees 0..{self.p_max}, asked for {j}")


def sphere_hodge_table(theta: float) -> HodgeTraceTable:
    """Rotation of the unit 2-sphere.

    Harmonic forms are the constants and the area form, both fixed by an
    orientation-preserving isometry; there are no harmonic 1-forms.
    """
    models = tuple(spectral.sphere_rotation_hodge(theta, p) for p in range(3))
    return HodgeTraceTable(f"sphere(theta={theta:.12g})", 0, models, (1.0, 0.0, 1.0))


def torus_hodge_table(d: int, Rmat, v=None) -> HodgeTraceTable:
    """Flat torus; harmonic forms are the constant forms, traced by ``wedge^j R^T``."""
    models = tuple(spectral.torus_hodge(d, Rmat, v, j) for j in range(d + 1))
    betas = tuple(float(np.trace(spectral.pullback_on_forms(Rmat, j))) for j in range(d + 1))
    return HodgeTraceTable(f"torus(d={d})", 0, models, betas)


def split_traces(table: HodgeTraceTable, p: int, t: float) -> tuple[float, float]:
    """``(f(t, d^(p)), f(t, delta^(p)))`` from alternating sums of Hodge traces."""
    table._require(p)
    reduced = [table.f(t, j) - table.beta(j) for j in range(p + 1)]
    f_delta = math.fsum((-1) ** (p - j) * reduced[j] for j in range(p + 1))
    f_d = math.fsum((-1) ** (p - 1 - j) * reduced[j] for j in range(p))
    return f_d, f_delta


def nonminimal_trace(table: HodgeTraceTable, p: int, a: float, b: float, t: float) -> float:
    """``Tr(T* e^{-t D^(p)})``, evaluated two ways that must agree.

    First via the split ``beta_p + f(a^2 t, d) + f(b^2 t, delta)``, then via
    ``f(b^2 t, Lap^(p)) + sum_{j<p} (-1)^(p-j) [f(b^2 t, Lap^(j)) - f(a^2 t, Lap^(j))]``.
    """
    if a == 0 or b == 0:
        raise ArgumentError("nonminimal weights must be nonzero (a != 0, b != 0)")
    f_d, _ = split_traces(table, p, a * a * t)
    _, f_delta = split_traces(table, p, b * b * t)
    first = table.beta(p) + f_d + f_delta
    second = table.f(b * b * t, p) + math.fsum(
        (-1) ** (p - j) * (table.f(b * b * t, j) - table.f(a * a * t, j)) for j in range(p))
    if abs(first - second) > FORM_IDENTITY_TOL:
        raise ModelError(f"nonminimal trace forms disagree: {first!r} vs {second!r}")
    return first


def nonminimal_model(table: HodgeTraceTable, p: int, a: float, b: float) -> SpectralModel:
    """Closed-form model wrapping :func:`nonminimal_trace`, for fitting."""
    return SpectralModel(f"nonminimal[{table.name}]", table.n_N,
                         closed_form=lambda t: nonminimal_trace(table, p, a, b, t),
                         params={"p": p, "a": a, "b": b})


@dataclass(frozen=True)
class ComponentCoefficients:
    """Heat coefficients of one fixed-point stratum (or an aggregate of equal-dimension strata).

    ``laplacian[j][k] = b_k(Lap^(j))``; ``nonminimal[(p, a, b)][k] = b_k(D^(p))``.
    """

    n_N: int
    laplacian: dict
    nonminimal: dict
    provenance: str = "spectral-fit"


@dataclass(frozen=True)
class GBFCoefficients:
    components: tuple[ComponentCoefficients, ...]

    @property
    def provenance(self) -> str:
        return ",".join(sorted({c.provenance for c in self.components}))


def coefficients_from_fits(table: HodgeTraceTable, p: int, pairs: Sequence[tuple[float, float]],
                           K: int = spectral.DEFAULT_K, t0: float = spectral.DEFAULT_T0,
                           q: float = spectral.DEFAULT_Q,
                           samples: int = spectral.DEFAULT_SAMPLES) -> GBFCoefficients:
    """Fit coefficients of ``Lap^(j)`` (``j <= p``) and of ``D^(p)`` for each ``(a, b)``.

    The ``D`` fit uses ``t0 / max(a^2, b^2, 1)`` so the rescaled times stay in
    the same small-``t`` window as the Laplacian fits.
    """
    lap = {}
    for j in range(p + 1):
        fit = spectral.extract_coefficients(table.models[j], K, t0, q, samples, table.eps)
        lap[j] = fit.coefficients
    nonmin = {}
    for a, b in pairs:
        scale = max(a * a, b * b, 1.0)
        fit = spectral.extract_coefficients(nonminimal_model(table, p, a, b), K, t0 / scale, q,
                                            samples, table.eps)
        nonmin[(p, a, b)] = fit.coefficients
    return GBFCoefficients((ComponentCoefficients(table.n_N, lap, nonmin, "spectral-fit"),))


@dataclass(frozen=True)
class GBFReport:
    p: int
    a: float
    b: float
    l: float
    lhs: float
    rhs: float
    gap: float
    provenance: str
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"p": self.p, "a": self.a, "b": self.b, "l": self.l, "lhs": self.lhs,
               "rhs": self.rhs, "gap": self.gap, "provenance": self.provenance}
        out.update(self.extra)
        return out


def _coefficient_index(l: float, n_N: int) -> int:
    k = l + n_N / 2
    if abs(k - round(k)) > 1e-12:
        raise ArgumentError(
            f"coefficient index l + n_N/2 = {k} is fractional for n_N={n_N}; "
            "pick l so that every component has an integer index")
    return int(round(k))


def _get(arr, k: int, what: str) -> float:
    if k < 0:
        return 0.0
    if k >= len(arr):
        raise ArgumentError(f"{what}: coefficient b_{k} not available (have {len(arr)})")
    return float(arr[k])


def gbf_identity_check(coeffs: GBFCoefficients, p: int, a: float, b: float, l: float) -> GBFReport:
    """Both sides of the coefficient identity for ``t^l``.

    ``sum_N (4pi)^(-n/2) b_{l+n/2}(D^(p))`` against
    ``b^(2l) sum_N (4pi)^(-n/2) b_{l+n/2}(Lap^(p))
    + sum_{j<p} (-1)^(p-j) (b^(2l) - a^(2l)) sum_N (4pi)^(-n/2) b_{l+n/2}(Lap^(j))``.
    """
    lhs, rhs = [], []
    for comp in coeffs.components:
        k = _coefficient_index(l, comp.n_N)
        w = (4 * math.pi) ** (-comp.n_N / 2)
        if (p, a, b) not in comp.nonminimal:
            raise ArgumentError(f"no nonminimal coefficients for (p, a, b) = {(p, a, b)}")
        lhs.append(w * _get(comp.nonminimal[(p, a, b)], k, "D"))
        rhs.append(b ** (2 * l) * w * _get(comp.laplacian[p], k, f"Lap^{p}"))
        for j in range(p):
            rhs.append((-1) ** (p - j) * (b ** (2 * l) - a ** (2 * l)) * w
                       * _get(comp.laplacian[j], k, f"Lap^{j}"))
    L, Rt = math.fsum(lhs), math.fsum(rhs)
    return GBFReport(p, a, b, l, L, Rt, abs(L - Rt), coeffs.provenance)


def gbf_special_cases(coeffs: GBFCoefficients, p: int, a: float, b: float) -> list[GBFReport]:
    """Leading and subleading identities for strata of one common dimension ``n``.

    ``sum_N b_0(D) = b^-n sum_N b_0(Lap^p) + sum_{j<p} (-1)^(p-j) (b^-n - a^-n) sum_N b_0(Lap^j)``
    and the same for ``b_1`` with exponent ``2 - n``.
    """
    dims = {c.n_N for c in coeffs.components}
    if len(dims) != 1:
        raise ArgumentError(f"fixed-point strata have mixed dimensions {sorted(dims)}")
    n = dims.pop()
    reports = []
    for k, name in ((0, "leading"), (1, "subleading")):
        e = 2 * k - n
        lhs = math.fsum(_get(c.nonminimal[(p, a, b)], k, "D") for c in coeffs.components)
        rhs = [b ** e * math.fsum(_get(c.laplacian[p], k, f"Lap^{p}") for c in coeffs.components)]
        for j in range(p):
            rhs.append((-1) ** (p - j) * (b ** e - a ** e)
                       * math.fsum(_get(c.laplacian[j], k, f"Lap^{j}") for c in coeffs.components))
        R = math.fsum(rhs)
        reports.append(GBFReport(p, a, b, k - n / 2, lhs, R, abs(lhs - R), coeffs.provenance,
                                 {"case": name, "n": n}))
    return reports
