import numpy as np
import pytest

from gbbm.grid import GridSpec
from gbbm.problem import GaussianBump, Problem, make_flux, make_signal


@pytest.fixture
def small_grid():
    return GridSpec(2 * np.pi, np.pi, 16, 8)


@pytest.fixture
def mid_grid():
    return GridSpec(40.0, 20.0, 64, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def pulse():
    return make_signal("pulse", [(0.2, 20.0, 2.5, 2.0)])


@pytest.fixture
def bump():
    return GaussianBump(0.5, 20.0, 8.0, 2.0)


@pytest.fixture
def bbm_problem(mid_grid, pulse):
    return Problem(mid_grid, make_flux("bbm", (1.0, 1.0)), pulse)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Log one acceptance line; it is echoed in the terminal summary."""

    def _record(number: int, passed: bool, detail: str, seconds: float):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}  [{seconds:.1f} s]"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
