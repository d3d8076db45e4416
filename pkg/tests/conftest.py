import numpy as np
import pytest

from logcave.rng import make_rng
from logcave.smoothed import smooth_tent
from logcave.tentfit import fit_lcmle


def gauss_points(d: int, n: int, seed: int) -> np.ndarray:
    return make_rng(seed, 997).standard_normal((n, d))


@pytest.fixture(scope="session")
def tent_1d():
    return fit_lcmle(gauss_points(1, 60, 1))


@pytest.fixture(scope="session")
def tent_2d():
    return fit_lcmle(gauss_points(2, 80, 2))


@pytest.fixture(scope="session")
def tent_3d():
    return fit_lcmle(gauss_points(3, 60, 3), tol=1e-6)


@pytest.fixture(scope="session")
def model_1d(tent_1d):
    return smooth_tent(tent_1d)


@pytest.fixture(scope="session")
def model_2d(tent_2d):
    return smooth_tent(tent_2d)


@pytest.fixture(scope="session")
def model_3d(tent_3d):
    return smooth_tent(tent_3d)
