import itertools
import logging

import numpy as np
import pytest

from ridgeprox.geometry import PointSet
from ridgeprox.repro import build_section1, build_unit_square_instance

GRID_4 = [(x, y) for x in range(4) for y in range(4)]
DIRECTION_PAIRS = (((1, 0), (0, 1)), ((1, 1), (1, -1)))


def grid_set(n, exact=True):
    """n x n integer grid under the coordinate directions, row-major in x"""
    points = [(x, y) for x, y in itertools.product(range(n), range(n))]
    return PointSet.from_coordinates(points, (1, 0), (0, 1), exact=exact)


def make_random_instance(seed, min_points=2, max_points=12):
    """Seeded subset of the 4 x 4 integer grid with one of two direction pairs, in exact mode"""
    rng = np.random.default_rng(seed)
    m = int(rng.integers(min_points, max_points + 1))
    idx = sorted(rng.choice(len(GRID_4), size=m, replace=False).tolist())
    dir1, dir2 = DIRECTION_PAIRS[int(rng.integers(0, len(DIRECTION_PAIRS)))]
    ps = PointSet.from_coordinates([GRID_4[i] for i in idx], dir1, dir2, exact=True)
    return ps, rng


@pytest.fixture
def grid():
    return grid_set


@pytest.fixture
def grid2():
    return grid_set(2)


@pytest.fixture
def grid3():
    return grid_set(3)


@pytest.fixture
def section1_7():
    return build_section1(7)


@pytest.fixture
def square_instance():
    return build_unit_square_instance


@pytest.fixture
def random_instance():
    return make_random_instance


@pytest.fixture(autouse=True)
def reset_root_logging():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
