import numpy as np
import pytest

from tdls.grid import disk_contrast, make_grid

DISK_RADIUS = 0.275
DISK_Q = -0.5


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def disk16():
    grid = make_grid(2, 16, DISK_RADIUS)
    return grid, disk_contrast(grid, DISK_RADIUS, DISK_Q)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.SUMMARY:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.SUMMARY:
            terminalreporter.write_line(line)
