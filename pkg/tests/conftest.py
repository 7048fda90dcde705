import numpy as np
import pytest

from semschwarz.sem_core import Mesh2D, build_operator_set


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_mesh():
    return Mesh2D(2, 2)


@pytest.fixture(scope="session")
def ops4():
    return build_operator_set(4)
