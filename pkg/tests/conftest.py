import math

import numpy as np
import pytest

from geodeck import cube, double_polygon, regular_icosahedron, regular_tetrahedron
from geodeck.harness import regular_polygon

UNIT_SQUARE = [[0, 0], [1, 0], [1, 1], [0, 1]]


@pytest.fixture(scope="session")
def tet():
    return regular_tetrahedron()


@pytest.fixture(scope="session")
def box():
    return cube()


@pytest.fixture(scope="session")
def ico():
    return regular_icosahedron()


@pytest.fixture(scope="session")
def dsquare():
    return double_polygon(UNIT_SQUARE)


@pytest.fixture(scope="session")
def dhex():
    return double_polygon(regular_polygon(6))


def random_acute(rng):
    """Random acute side triple, comfortably away from right angles."""
    while True:
        s = rng.uniform(0.6, 1.4, size=3)
        a2, b2, c2 = s ** 2
        if min(b2 + c2 - a2, a2 + c2 - b2, a2 + b2 - c2) > 0.05:
            return tuple(float(x) for x in s)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
