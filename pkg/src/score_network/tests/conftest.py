import numpy as np
import pytest

from src.score_network.heads import build_consistency_net, build_score_net
from src.score_network.mlp import MlpNet

COND_DIM = 3


def randomize(net: MlpNet, rng: np.random.Generator, scale: float = 0.5):
    """Give every parameter (the zero-initialised last layer included) a
    random value so gradient checks exercise all paths."""
    net.set_params([rng.normal(0, scale, size=p.shape) for p in net.params])
    return net


@pytest.fixture
def rng():
    return np.random.default_rng(11)


@pytest.fixture
def score_net(rng):
    net = build_score_net(COND_DIM, 1000.0, hidden=(8, 8), rng=rng)
    randomize(net.trunk, rng)
    return net


@pytest.fixture
def consistency_net(rng):
    net = build_consistency_net(COND_DIM, 1000.0, 1.0, hidden=(8, 8), rng=rng)
    randomize(net.trunk, rng)
    return net
