import numpy as np
import pytest

from terrasight.segmentation import train_test_corpus


@pytest.fixture(scope="session")
def small_corpus():
    """Six train / three test 64x64 images; enough for behavioural checks."""
    return train_test_corpus(6, 3, seed=11, size=64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
