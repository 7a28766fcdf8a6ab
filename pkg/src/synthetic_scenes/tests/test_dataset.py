import json

import numpy as np
import pytest

from src.grasp_geometry.rectangle import is_success
from src.synthetic_scenes.condition import COND_DIM
from src.synthetic_scenes.dataset import (
    MANIFEST_FILE,
    SAMPLES_FILE,
    DatasetError,
    Sample,
    SplitSpec,
    build_dataset,
    generate_samples,
    load_dataset,
    make_sample,
    training_arrays,
)
from src.synthetic_scenes.scene import SceneConfig


def test_file_is_deterministic(tmp_path, config):
    a = build_dataset(100, SplitSpec("seen"), 11, tmp_path / "a", config)
    b = build_dataset(100, SplitSpec("seen"), 11, tmp_path / "b", config)
    data_a = (tmp_path / "a" / SAMPLES_FILE).read_bytes()
    assert data_a == (tmp_path / "b" / SAMPLES_FILE).read_bytes()
    assert (tmp_path / "a" / MANIFEST_FILE).read_bytes() == (
        tmp_path / "b" / MANIFEST_FILE
    ).read_bytes()
    assert len(data_a.decode("utf-8").splitlines()) == 100
    assert a.manifest["checksum"] == b.manifest["checksum"]


def test_sharding_does_not_change_output(config):
    single = generate_samples(60, SplitSpec("mixed"), 3, config, threads=1)
    sharded = generate_samples(60, SplitSpec("mixed"), 3, config, threads=4)
    assert single == sharded
    assert make_sample(17, 3, config, SplitSpec("mixed")) == single[17]


def test_round_trip(mixed_samples):
    for sample in mixed_samples:
        assert Sample.from_dict(json.loads(sample.to_json())) == sample


def test_load_dataset(tmp_path, config):
    built = build_dataset(30, SplitSpec("mixed"), 2, tmp_path, config)
    loaded = load_dataset(tmp_path)
    assert loaded.samples == built.samples
    assert loaded.manifest["counts"] == {"seen": 15, "unseen": 15}
    assert loaded.manifest["held_out"] == [["tee", "head"], ["ell", "handle"]]
    assert load_dataset(tmp_path / SAMPLES_FILE).samples == built.samples


def test_unseen_combinations_are_held_out(mixed_samples):
    spec = SplitSpec("mixed")

    def combo(s):
        shape = s.scene.objects[s.prompt.object_index].shape_class
        return (shape, s.prompt.part_name)

    seen = {combo(s) for s in mixed_samples if s.split_tag == "seen"}
    unseen = {combo(s) for s in mixed_samples if s.split_tag == "unseen"}
    assert unseen == set(spec.held_out)
    assert not seen & unseen


def test_sample_invariants(mixed_samples):
    for s in mixed_samples:
        assert len(s.condition) == COND_DIM
        assert 1 <= len(s.gt_grasps) <= 2
        assert s.prompt.object_index < min(4, len(s.scene.objects))
        for g in s.gt_grasps:
            assert is_success(g, s.gt_grasps)


def test_invalid_requests(tmp_path, config):
    with pytest.raises(ValueError):
        build_dataset(0, SplitSpec("seen"), 1, tmp_path, config)
    with pytest.raises(ValueError):
        SplitSpec("train")


def test_load_errors(tmp_path):
    with pytest.raises(OSError):
        load_dataset(tmp_path / "missing.jsonl")
    bad = tmp_path / SAMPLES_FILE
    bad.write_text("{not json\n")
    with pytest.raises(DatasetError, match="malformed"):
        load_dataset(tmp_path)
    bad.write_text(json.dumps({"index": 0}) + "\n")
    with pytest.raises(DatasetError):
        load_dataset(tmp_path)
    bad.write_text("\n")
    with pytest.raises(DatasetError, match="empty"):
        load_dataset(tmp_path)


def test_write_error_names_path(tmp_path, config):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        build_dataset(2, SplitSpec("seen"), 1, blocker / "sub", config)


def test_training_arrays(mixed_samples):
    x0, y = training_arrays(mixed_samples)
    assert x0.shape[0] == sum(len(s.gt_grasps) for s in mixed_samples)
    assert x0.shape[1] == 5 and y.shape[1] == COND_DIM
    assert np.all(np.abs(x0) <= 1)


def test_small_workspace(tmp_path):
    config = SceneConfig(extent=10.0, k_max=2)
    data = build_dataset(5, SplitSpec("unseen"), 4, tmp_path, config)
    assert all(s.split_tag == "unseen" for s in data.samples)
    assert data.extent == 10.0
