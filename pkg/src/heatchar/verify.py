"""Built-in cross-validation suites: closed formulas against jets and spectra.

Every check calls library functions through their module attribute
(``coefficients.correction_C`` rather than a bound import) so a patched
function is what gets verified.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import coefficients, gbf, jets, sampling, spectral, tensors, torsion
from .errors import ArgumentError

SUITES = ("tensors", "jet", "variants", "spectral", "torsion", "gbf")
THREADS_ENV = "HEATCHAR_THREADS"


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    gap: float
    tol: float
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.gap <= self.tol)

    def as_dict(self) -> dict:
        out = {"suite": self.suite, "name": self.name, "gap": self.gap, "tol": self.tol,
               "passed": self.passed, "seconds": self.seconds}
        out.update(self.detail)
        return out


def worker_count() -> int:
    """Thread count for the suite runner, capped by ``HEATCHAR_THREADS``."""
    cap = os.environ.get(THREADS_ENV)
    default = min(len(SUITES), os.cpu_count() or 1)
    if cap is None or cap == "":
        return default
    try:
        value = int(cap)
    except ValueError as exc:
        raise ArgumentError(f"{THREADS_ENV} must be a positive integer, got {cap!r}") from exc
    if value < 1:
        raise ArgumentError(f"{THREADS_ENV} must be a positive integer, got {cap!r}")
    return min(value, default)


def _timed(suite: str, name: str, tol: float, fn: Callable[[], tuple[float, dict]]) -> Check:
    start = time.perf_counter()
    gap, detail = fn()
    return Check(suite, name, float(gap), tol, time.perf_counter() - start, detail)


# --------------------------------------------------------------------------
# suites
# --------------------------------------------------------------------------

def suite_tensors(seed: int = 0, count: int = 10) -> list[Check]:
    rng = np.random.default_rng(seed)

    def kronecker():
        worst = 0.0
        for d in range(1, 6):
            for n in range(d):
                for _ in range(count):
                    M = np.eye(d)
                    M[n:, n:] = sampling.random_orthogonal(rng, d - n, 0.0).T
                    for p in range(d + 1):
                        worst = max(worst, abs(tensors.wedge_trace_kronecker(M, p, n)
                                               - tensors.wedge_trace(M, p)))
        return worst, {}

    def alternating():
        worst = 0.0
        for d in range(1, 7):
            for _ in range(count):
                M = rng.normal(size=(d, d))
                s = math.fsum((-1) ** p * tensors.wedge_trace(M, p) for p in range(d + 1))
                worst = max(worst, abs(s - np.linalg.det(np.eye(d) - M)))
        return worst, {}

    def charpoly():
        worst = 0.0
        for d in range(1, 7):
            M = rng.normal(size=(d, d))
            for p in range(d + 1):
                worst = max(worst, abs(tensors.wedge_trace_charpoly(M, p)
                                       - tensors.wedge_trace(M, p)))
        return worst, {}

    return [_timed("tensors", "kronecker_vs_minors", 1e-10, kronecker),
            _timed("tensors", "alternating_sum_det", 1e-10, alternating),
            _timed("tensors", "charpoly_vs_minors", 1e-9, charpoly)]


def suite_jet(seed: int = 1, count: int = 40) -> list[Check]:
    germs = sampling.germ_batch(np.random.default_rng(seed), count)

    def lc():
        gaps = [abs(coefficients.correction_C(g)
                    - jets.box_y_of_jet(coefficients.w_jet(g), g.p)) for g in germs]
        return max(gaps), {"germs": len(germs)}

    def bar():
        gaps = [abs(torsion.correction_Cbar(g) - jets.box_y_of_jet(torsion.wbar_jet(g), g.p))
                for g in germs]
        return max(gaps), {"germs": len(germs)}

    def hat():
        hs = [g for g in germs if g.p >= 1]
        gaps = [abs(torsion.correction_Chat(g) - jets.box_y_of_jet(torsion.what_jet(g), g.p))
                for g in hs]
        gaps += [abs(torsion.correction_Chat(g) - torsion.correction_Chat_closed(g)) for g in hs]
        return max(gaps), {"germs": len(hs)}

    return [_timed("jet", "C_vs_jet", 1e-10, lc),
            _timed("jet", "Cbar_vs_jet", 1e-10, bar),
            _timed("jet", "Chat_vs_jet_and_closed", 1e-10, hat)]


def suite_variants(seed: int = 2, count: int = 20) -> list[Check]:
    germs = sampling.germ_batch(np.random.default_rng(seed), count, torsion=False)

    def zero_torsion():
        worst = 0.0
        for g in germs:
            g0 = g.with_torsion(tensors.TorsionData.zeros(g.d))
            b = coefficients.b1(g0)
            worst = max(worst, abs(torsion.b1_bar(g0) - b))
            if g.p >= 1:
                worst = max(worst, abs(torsion.b1_hat(g0) - b))
        return worst, {"germs": len(germs)}

    def scalar():
        worst = 0.0
        for g in germs:
            g0 = g.with_degree(0)
            res = coefficients.lc_result(g0)
            expected = g0.detB_abs * coefficients.curvature_bracket(g0)
            worst = max(worst, abs(res.b1 - expected), abs(res.breakdown["correction"]))
        return worst, {"germs": len(germs)}

    return [_timed("variants", "zero_torsion_reduction", 1e-12, zero_torsion),
            _timed("variants", "scalar_reduction", 1e-12, scalar)]


def suite_spectral() -> list[Check]:
    checks = []
    for theta in (math.pi / 2, math.pi, 2 * math.pi / 3):
        def c0(theta=theta):
            fit = spectral.extract_coefficients(spectral.sphere_rotation_functions(theta))
            return abs(fit[0] - 2.0 / (4 * math.sin(theta / 2) ** 2)), {"theta": theta}
        checks.append(_timed("spectral", f"sphere_c0_theta={theta:.6f}", 1e-6, c0))
    theta = math.pi / 2
    for p, model in ((0, spectral.sphere_rotation_functions(theta)),
                     (1, spectral.sphere_rotation_oneforms_bochner(theta))):
        def c1(p=p, model=model):
            fit = spectral.extract_coefficients(model)
            return abs(fit[1] - 2 * coefficients.b1(tensors.sphere2_germ(theta, p))), {"p": p}
        checks.append(_timed("spectral", f"sphere_c1_p={p}", 1e-4, c1))

    def torus():
        R = np.array([[0.0, -1.0], [1.0, 0.0]])
        worst = 0.0
        for p in range(3):
            model = spectral.torus_lattice_isometry(2, R, p=p)
            values = [spectral.heat_trace(model, t) for t in (1e-3, 0.1, 1.0)]
            exact = float(np.trace(spectral.pullback_on_forms(R, p)))
            germ_sum = model.params["fixed_points"] * coefficients.b0(
                tensors.FixedPointGerm.build(R, p))
            worst = max(worst, max(abs(v - exact) for v in values), abs(germ_sum - exact))
        return worst, {}
    checks.append(_timed("spectral", "torus_rotation_exact", 1e-10, torus))
    return checks


def _torus_torsion_gap(Rmat, Q, p: int) -> tuple[float, dict]:
    d = Rmat.shape[0]
    model = spectral.torus_constant_torsion(d, Rmat, Q, p)
    fit = spectral.extract_coefficients(model, t0=1e-2, q=math.sqrt(2.0))
    germ = tensors.FixedPointGerm.build(Rmat, p, torsion=tensors.TorsionData.from_contorsion(Q))
    expected = model.params["fixed_points"] * torsion.b1_bar(germ)
    return abs(fit[1] - expected), {"c1": fit[1], "expected": expected,
                                    "invariant": spectral.contorsion_invariant(Rmat, Q)}


def planar_contorsion(q) -> np.ndarray:
    """Constant contorsion ``Q[k] = q_k J`` on the 2-torus, ``J`` the unit rotation generator."""
    q = np.asarray(q, dtype=float)
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.einsum("k,ab->kab", q, J)


def random_contorsion(d: int, magnitude: float, seed: int = 0) -> np.ndarray:
    """Random constant contorsion (skew in the last two slots) of Frobenius norm ``magnitude``."""
    Q = np.random.default_rng(seed).normal(size=(d, d, d))
    Q = Q - Q.transpose(0, 2, 1)
    return magnitude * Q / np.linalg.norm(Q)


def suite_torsion(seed: int = 3) -> list[Check]:
    rot90 = np.array([[0.0, -1.0], [1.0, 0.0]])
    rot180 = -np.eye(2)
    J4 = np.kron(np.eye(2), rot90)
    cycle = np.array([[0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]], dtype=float)
    q2 = planar_contorsion([0.1, 0.0])
    Q4 = random_contorsion(4, 0.3, seed)
    cases = [("2d_rot90_p1", rot90, q2, 1), ("2d_rot180_p1", rot180, q2, 1),
             ("4d_J_p2", J4, Q4, 2), ("4d_cycle_p1", cycle, Q4, 1),
             ("4d_cycle_p2", cycle, Q4, 2)]
    checks = []
    for name, R, Q, p in cases:
        checks.append(_timed("torsion", f"torus_{name}", 1e-3,
                             lambda R=R, Q=Q, p=p: _torus_torsion_gap(R, Q, p)))
    return checks


def suite_gbf() -> list[Check]:
    table = gbf.sphere_hodge_table(math.pi / 2)
    pairs = [(1.0, 2.0), (2.0, 3.0)]

    def identity():
        worst = 0.0
        for p in range(3):
            coeffs = gbf.coefficients_from_fits(table, p, pairs)
            for a, b in pairs:
                for l in (0, 1):
                    worst = max(worst, gbf.gbf_identity_check(coeffs, p, a, b, l).gap)
        return worst, {}

    def forms():
        worst = 0.0
        for p in range(3):
            for a, b in pairs:
                for t in (0.05, 0.1, 0.5):
                    first = gbf.nonminimal_trace(table, p, a, b, t)
                    f_d, _ = gbf.split_traces(table, p, a * a * t)
                    _, f_delta = gbf.split_traces(table, p, b * b * t)
                    worst = max(worst, abs(first - (table.beta(p) + f_d + f_delta)))
        return worst, {}

    def lefschetz():
        ts = np.geomspace(1e-3, 1.0, 13)
        worst = max(abs(math.fsum((-1) ** p * table.f(float(t), p) for p in range(3)) - 2.0)
                    for t in ts)
        return worst, {}

    return [_timed("gbf", "identity_sphere", 1e-5, identity),
            _timed("gbf", "two_forms_agree", 1e-10, forms),
            _timed("gbf", "lefschetz_constancy", 1e-10, lefschetz)]


_REGISTRY: dict[str, Callable[[], list[Check]]] = {
    "tensors": lambda: suite_tensors(),
    "jet": lambda: suite_jet(),
    "variants": lambda: suite_variants(),
    "spectral": suite_spectral,
    "torsion": suite_torsion,
    "gbf": suite_gbf,
}


def run_suites(only=None, workers: int | None = None) -> list[Check]:
    """Run the named suites (all by default); output order follows :data:`SUITES`."""
    names = list(SUITES) if not only else list(only)
    unknown = [s for s in names if s not in _REGISTRY]
    if unknown:
        raise ArgumentError(f"unknown suite(s) {unknown}; choose from {list(SUITES)}")
    workers = worker_count() if workers is None else workers
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda s: _REGISTRY[s](), names))
    return [c for group in results for c in group]
