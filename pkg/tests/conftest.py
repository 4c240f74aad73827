import numpy as np
import pytest

from enclosure.forward import SourceSpec, synthesize_cauchy
from enclosure.geometry import Circle, PolygonDomain
from enclosure.quadrature import boundary_rule

UNIT_SQUARE = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
CENTERED_SQUARE = [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]
L_SHAPE = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]]


@pytest.fixture(scope="session")
def unit_square():
    return PolygonDomain(UNIT_SQUARE)


@pytest.fixture(scope="session")
def centered_square():
    return PolygonDomain(CENTERED_SQUARE)


@pytest.fixture(scope="session")
def l_shape():
    return PolygonDomain(L_SHAPE)


@pytest.fixture(scope="session")
def square_data(centered_square):
    """Exact boundary data of the centered unit square, rho = 1, k = 1, on the unit circle."""
    om = Circle((0.0, 0.0), 1.0)
    return synthesize_cauchy(SourceSpec(centered_square), om, 1.0, boundary_rule(om, 60.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":").rstrip("ab"))):
            terminalreporter.write_line(line)
