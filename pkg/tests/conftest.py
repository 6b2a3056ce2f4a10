import numpy as np
import pytest

from lsreg.grid import Grid


@pytest.fixture(scope="session")
def g17():
    return Grid(17)


@pytest.fixture(scope="session")
def g33():
    return Grid(33)


@pytest.fixture(scope="session")
def g65():
    return Grid(65)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
