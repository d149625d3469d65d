import numpy as np
import pytest

from centralspin.model import ModelParams
from centralspin.states import QubitState


@pytest.fixture
def small_params():
    return ModelParams.from_temperature(2.5, 2.0, 0.7, 4, 1.5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_qubit(rng) -> QubitState:
    v = rng.normal(size=3)
    v *= rng.uniform() ** (1 / 3) / np.linalg.norm(v)
    return QubitState.from_bloch(*v)
