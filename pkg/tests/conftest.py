import numpy as np
import pytest

from shapereg import femur_like_template


@pytest.fixture(scope="session")
def template600():
    return femur_like_template(600)


@pytest.fixture(scope="session")
def template200():
    return femur_like_template(200)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def random_cloud(rng, n=None, sigma=50.0):
    """Random jagged contour; local costs are well separated."""
    if n is None:
        n = int(rng.integers(20, 80))
    return rng.normal(0.0, sigma, n) + 1j * rng.normal(0.0, sigma, n)
