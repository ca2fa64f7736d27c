import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_matrix(rng, size=2):
    return rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
