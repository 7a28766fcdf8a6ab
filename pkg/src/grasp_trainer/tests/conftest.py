import logging
import os
from logging import config

import numpy as np
import pytest
import yaml

from src.grasp_trainer.config import TrainConfig, resolve_config
from src.synthetic_scenes.gaussian_toy import GaussianToy

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="package")
def logger():
    """Set up logger for testing."""
    with open(f"{FIXTURES}/test_logger_config.yaml", "r") as f:
        log_config = yaml.safe_load(f.read())
        config.dictConfig(log_config)
    yield logging.getLogger("TEST")


@pytest.fixture
def tiny_cfg_path():
    return f"{FIXTURES}/tiny.cfg"


@pytest.fixture
def tiny_config(tiny_cfg_path) -> TrainConfig:
    return resolve_config(tiny_cfg_path, {"cond_dim": 3})


@pytest.fixture(scope="package")
def toy_rows():
    """40 training rows of a three-condition Gaussian toy."""
    toy = GaussianToy.random(3, np.random.default_rng(8))
    x0, y, _ = toy.sample(40, np.random.default_rng(9))
    return x0, y
