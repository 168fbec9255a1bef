import numpy as np
import pytest

from walklim import model


@pytest.fixture(scope="session")
def q06():
    return model.params_from_q(0.6)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
