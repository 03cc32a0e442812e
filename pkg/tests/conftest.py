import numpy as np
import pytest

from sosvol.poly import Polynomial
from sosvol.semialg import INNER_K, Ball, Box, SemialgebraicSet


def interval_set(half: float = 0.5) -> SemialgebraicSet:
    x = Polynomial.variable(1, 0)
    return SemialgebraicSet(1, [Polynomial.constant(1, half * half) - x * x], INNER_K)


def disk_set(radius: float = 0.5) -> SemialgebraicSet:
    return SemialgebraicSet(2, [Polynomial.ball(2, radius)], INNER_K)


@pytest.fixture
def interval():
    return interval_set(), Box([1.0])


@pytest.fixture
def disk():
    return disk_set(), Ball(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
