import numpy as np
import pytest

from bergman import weights as W


@pytest.fixture(scope="session")
def w_const1():
    return W.normalize("constant", n=1)


@pytest.fixture(scope="session")
def w_const2():
    return W.normalize("constant", n=2)


@pytest.fixture(scope="session")
def w_pow1():
    return W.normalize("power", {"beta": 0.5}, n=1)


@pytest.fixture(scope="session")
def w_pow2():
    return W.normalize("power", {"beta": 0.5}, n=2)


@pytest.fixture(scope="session")
def grid_const1(w_const1):
    return W.dyadic_radii(w_const1, 12)


@pytest.fixture(scope="session")
def grid_pow1(w_pow1):
    return W.dyadic_radii(w_pow1, 12)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def random_ball_points(rng, n, count, rmax=0.95):
    pts = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts * (rmax * rng.uniform(0, 1, (count, 1)) ** (1 / (2 * n)))
