import numpy as np
import pytest

from tunnelctl import Grid1D, Grid2D


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid_full():
    """Electronic grid used throughout: 1024 points on [-80, 80)."""
    return Grid1D(1024, -80.0, 80.0)


@pytest.fixture
def grid_small():
    return Grid1D(256, -40.0, 40.0)


@pytest.fixture
def grid_2d_small():
    return Grid2D(Grid1D(64, -40.0, 40.0), Grid1D(64, 0.5, 40.5))


def random_state(grid, rng):
    from tunnelctl import WaveFunction

    amps = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    return WaveFunction(amps, grid).normalized()


# acceptance report -----------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
