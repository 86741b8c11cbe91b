import numpy as np
import pytest

from roughavg.spectral import Generator


@pytest.fixture(scope="session")
def gen8():
    return Generator.dirichlet_laplacian(8)


@pytest.fixture(scope="session")
def gen32():
    return Generator.dirichlet_laplacian(32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
