import itertools
import math

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def esym_from_eigenvalues(M, p):
    """Elementary symmetric polynomial of the eigenvalues; independent of minor sums."""
    ev = np.linalg.eigvals(np.asarray(M, dtype=float))
    total = sum(np.prod([ev[i] for i in idx]) for idx in itertools.combinations(range(len(ev)), p))
    return float(np.real(total)) if p else 1.0


def sphere_fixed_point_b1(theta, p):
    """Closed forms of b1 at a pole of the unit 2-sphere for the rotation by theta.

    Worked by hand from B = (I - A)^-1 with |det B| = 1/(4 s^2), s = sin(theta/2):
    p = 0 gives 1/(8 s^4); p = 1 gives (1/s^2 - 2 + 1/(2 s^4)) / 2.
    """
    s = math.sin(theta / 2)
    if p == 0:
        return 1.0 / (8 * s ** 4)
    if p == 1:
        return (1 / s ** 2 - 2 + 1 / (2 * s ** 4)) / 2
    raise ValueError(p)


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number, title, passed, detail):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
