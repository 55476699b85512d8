import pytest

from wulff_lab import box, regular_polygon, standard_simplex
from wulff_lab.rng import RngSeed


@pytest.fixture
def square():
    return box([-1.0, -1.0], [1.0, 1.0], label="square")


@pytest.fixture
def unit_square():
    return box([0.0, 0.0], [1.0, 1.0], label="unit-square")


@pytest.fixture
def wide_box():
    return box([0.0, 0.0], [2.0, 0.5], label="wide-box")


@pytest.fixture
def triangle():
    return standard_simplex(2, label="triangle")


@pytest.fixture
def disc():
    return regular_polygon(256, label="disc-256")


@pytest.fixture
def seed():
    return RngSeed(2026, 0)
