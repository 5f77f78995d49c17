import numpy as np
import pytest

from contemper.models import BimodalModel
from contemper.models.bimodal import simulate_data


@pytest.fixture(scope="session")
def bimodal_data():
    return simulate_data(0)


@pytest.fixture(scope="session")
def bimodal1(bimodal_data):
    return BimodalModel(bimodal_data, one_parameter=True)


@pytest.fixture(scope="session")
def bimodal2(bimodal_data):
    return BimodalModel(bimodal_data, one_parameter=False)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
