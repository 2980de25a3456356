import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_mask(rng, shape, density=0.4):
    return (rng.random(shape) < density).astype(np.uint8)
