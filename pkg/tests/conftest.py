import numpy as np
import pytest

from d2chain.vertex import D2Boundary, XXZBoundary

ACCEPTANCE_LINES: list = []


def random_xxz_boundary(rng, scale=0.8) -> XXZBoundary:
    vals = rng.uniform(-scale, scale, 6) + 1j * rng.uniform(-scale, scale, 6)
    return XXZBoundary(*vals)


def random_d2_boundary(rng) -> D2Boundary:
    return D2Boundary(random_xxz_boundary(rng), random_xxz_boundary(rng))


def random_point(rng, scale=1.0) -> complex:
    return complex(rng.uniform(-scale, scale), rng.uniform(-scale, scale))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
