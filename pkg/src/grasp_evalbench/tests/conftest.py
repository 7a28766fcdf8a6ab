import logging
import os
from logging import config

import pytest
import yaml

from src.grasp_trainer.checkpoint import init_state
from src.grasp_trainer.config import TrainConfig
from src.synthetic_scenes.dataset import SplitSpec, generate_samples


@pytest.fixture(scope="package")
def logger():
    """Set up logger for testing."""
    with open(
        f"{os.path.dirname(__file__)}/fixtures/test_logger_config.yaml", "r"
    ) as f:
        log_config = yaml.safe_load(f.read())
        config.dictConfig(log_config)
    yield logging.getLogger("TEST")


@pytest.fixture(scope="package")
def samples():
    """Alternating seen/unseen grasp prompts."""
    return generate_samples(40, SplitSpec("mixed"), seed=4)


@pytest.fixture(scope="package")
def state():
    """Untrained but fully formed networks; enough to drive the harness."""
    return init_state(TrainConfig(hidden_dims=(32, 32), seed=6))


@pytest.fixture(scope="package")
def wide_state():
    """Default-width networks, so a network call dominates a sampler step."""
    return init_state(TrainConfig(seed=6))
