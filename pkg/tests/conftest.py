import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ci", deadline=None, derandomize=True, max_examples=60)
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=0xA11CE))


def make_rng(key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=key))
