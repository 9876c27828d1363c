import numpy as np
import pytest

from explab import bhattacharyya_matrix, bsc, uniform_input


@pytest.fixture(scope="session")
def ch11():
    return bsc(0.11)


@pytest.fixture(scope="session")
def q2():
    return uniform_input(2)


@pytest.fixture(scope="session")
def d11(ch11):
    return bhattacharyya_matrix(ch11)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
