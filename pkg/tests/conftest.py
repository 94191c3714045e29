import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes `import oracles` work

from khull import Ball, Ellipsoid, PNormBall, Polytope


@pytest.fixture
def rng():
    return np.random.default_rng(20_240_817)


@pytest.fixture
def unit_disk():
    return Ball(1.0, np.zeros(2))


@pytest.fixture
def unit_ball3():
    return Ball(1.0, np.zeros(3))


@pytest.fixture
def square():
    return Polytope([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


@pytest.fixture
def ellipse21():
    return Ellipsoid([2.0, 1.0], np.zeros(2))


@pytest.fixture
def pball4():
    return PNormBall(4.0, 1.0, np.zeros(2))


def smooth_kinds_2d():
    """One instance of each strictly convex planar kind, origin interior."""
    return [
        Ball(1.0, np.zeros(2)),
        Ball(1.5, np.array([0.2, -0.3])),
        Ellipsoid([2.0, 1.0], np.zeros(2)),
        Ellipsoid([1.5, 0.7], np.array([0.1, 0.2]),
                  np.array([[0.8, -0.6], [0.6, 0.8]])),
        PNormBall(4.0, 1.0, np.zeros(2)),
        PNormBall(1.5, 1.2, np.array([-0.1, 0.1])),
    ]


def all_kinds_2d():
    return smooth_kinds_2d() + [
        Polytope([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]),
        Polytope([[-1.0, -0.8], [1.2, -0.5], [0.3, 1.1], [-0.7, 0.9]]),
    ]
