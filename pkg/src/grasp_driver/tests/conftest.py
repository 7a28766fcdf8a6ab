import os
from types import SimpleNamespace

import pytest

from grasp_driver import main

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="package")
def workspace(tmp_path_factory):
    """A small dataset and a twelve-step training run built through the
    driver, shared by every test in this package."""
    root = tmp_path_factory.mktemp("driver")
    data, run = root / "data", root / "run"
    config = f"{FIXTURES}/tiny_run.cfg"
    gen = ["gen-data", "--out", str(data), "--n", "24", "--seed", "3"]
    assert main(gen) == 0
    train = ["train", "--data", str(data), "--out", str(run)]
    assert main(train + ["--config", config]) == 0
    return SimpleNamespace(
        root=root,
        data=str(data),
        run=run,
        checkpoint=str(run / "last.json"),
        config=config,
    )
