import numpy as np
import pytest

from src.synthetic_scenes.dataset import SplitSpec, generate_samples
from src.synthetic_scenes.scene import SceneConfig


@pytest.fixture
def rng():
    return np.random.default_rng(77)


@pytest.fixture(scope="package")
def config():
    return SceneConfig()


@pytest.fixture(scope="package")
def mixed_samples(config):
    return generate_samples(400, SplitSpec("mixed"), seed=5, config=config)
