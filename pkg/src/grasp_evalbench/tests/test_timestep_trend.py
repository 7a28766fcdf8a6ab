"""Desk recipe end to end: more sampling steps never cost success.

Trains for about 20 minutes; run with ``pytest -m slow``.
"""
import os

import pytest

from src.grasp_evalbench.evaluate import SamplerSpec, evaluate
from src.grasp_trainer.config import resolve_config
from src.grasp_trainer.trainer import fit_dataset
from src.synthetic_scenes.dataset import SplitSpec, generate_samples

pytestmark = pytest.mark.slow

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), *[".."] * 3))
DESK_CFG = os.path.join(ROOT, "configs", "desk.cfg")


@pytest.fixture(scope="module")
def desk_reports(logger, tmp_path_factory):
    config = resolve_config(DESK_CFG)
    train = generate_samples(2400, SplitSpec("seen"), seed=31)
    held = generate_samples(1000, SplitSpec("mixed"), seed=32)
    out = tmp_path_factory.mktemp("desk")
    state = fit_dataset(config, train, out).state
    return [
        evaluate(state, held, SamplerSpec("consistency", p), seed=33)
        for p in (1, 3, 10)
    ]


def test_eval_set_size(desk_reports):
    for report in desk_reports:
        assert report.seen.n == 500 and report.unseen.n == 500


def test_seen_rate_does_not_drop_with_steps(desk_reports):
    p1, p3, p10 = (r.seen_rate for r in desk_reports)
    assert p1 <= p3 + 0.02 <= p10 + 0.04


def test_ten_step_seen_rate(desk_reports):
    assert desk_reports[-1].seen_rate >= 0.6
