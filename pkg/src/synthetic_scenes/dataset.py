"""Samples, seen/unseen splits and the JSONL dataset format.

A dataset directory holds ``samples.jsonl`` (one sample per line, keys
sorted) and ``manifest.json`` (seed, generator config, split counts,
held-out combinations and a checksum of the samples file).

Every sample is generated from its own generator,
``default_rng([seed, index])``, so the output does not depend on how the
work is split across threads.
"""
import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from src.grasp_geometry.rectangle import GraspPose, encode_pose
from src.synthetic_scenes.condition import N_SLOTS, encode_condition
from src.synthetic_scenes.scene import (
    Prompt,
    Scene,
    SceneConfig,
    SceneGenerationError,
    generate_scene,
    ground_truth_grasp,
)
from src.synthetic_scenes.shapes import DEFAULT_HELD_OUT

SAMPLES_FILE = "samples.jsonl"
MANIFEST_FILE = "manifest.json"
SPLIT_MODES = ("seen", "unseen", "mixed")
MAX_SCENE_RETRIES = 100

logger = logging.getLogger("SYNTHDATA")


class DatasetError(RuntimeError):
    """A dataset file that exists but cannot be parsed into samples."""


@dataclass(frozen=True)
class SplitSpec:
    mode: str = "seen"
    held_out: Tuple[Tuple[str, str], ...] = DEFAULT_HELD_OUT

    def __post_init__(self):
        if self.mode not in SPLIT_MODES:
            raise ValueError(
                f"{__name__} ERROR: split mode must be one of {SPLIT_MODES}, "
                f"got {self.mode!r}"
            )

    def tag_for(self, shape_class: str, part_name: str) -> str:
        if (shape_class, part_name) in self.held_out:
            return "unseen"
        return "seen"

    def wanted_tag(self, index: int) -> str:
        if self.mode == "mixed":
            return "seen" if index % 2 == 0 else "unseen"
        return self.mode


@dataclass(frozen=True)
class Sample:
    index: int
    scene: Scene
    prompt: Prompt
    condition: Tuple[float, ...]
    gt_grasps: Tuple[GraspPose, ...]
    split_tag: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "scene": self.scene.to_dict(),
            "prompt": self.prompt.to_dict(),
            "condition": list(self.condition),
            "gt_grasps": [list(g.as_tuple()) for g in self.gt_grasps],
            "split_tag": self.split_tag,
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "Sample":
        return cls(
            int(doc["index"]),
            Scene.from_dict(doc["scene"]),
            Prompt.from_dict(doc["prompt"]),
            tuple(float(v) for v in doc["condition"]),
            tuple(GraspPose(*g) for g in doc["gt_grasps"]),
            doc["split_tag"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class Dataset:
    samples: List[Sample]
    manifest: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)

    def split(self, tag: str) -> List[Sample]:
        return [s for s in self.samples if s.split_tag == tag]

    @property
    def extent(self) -> float:
        return self.samples[0].scene.extent


def _candidates(scene: Scene, split: SplitSpec, tag: str):
    for i, obj in enumerate(scene.objects[:N_SLOTS]):
        for part in obj.parts:
            if split.tag_for(obj.shape_class, part.name) == tag:
                yield i, part.name


def make_sample(
    index: int, seed: int, config: SceneConfig, split: SplitSpec
) -> Sample:
    """Generate sample ``index`` of the dataset with master seed ``seed``."""
    tag = split.wanted_tag(index)
    for attempt in range(MAX_SCENE_RETRIES):
        rng = np.random.default_rng([seed, index, attempt])
        try:
            scene = generate_scene(rng, config)
        except SceneGenerationError as err:
            logger.debug(f"Sample {index} attempt {attempt}: {err}")
            continue
        options = list(_candidates(scene, split, tag))
        if not options:
            continue
        object_index, part_name = options[int(rng.integers(len(options)))]
        prompt = Prompt.build(scene, object_index, part_name)
        return Sample(
            index,
            scene,
            prompt,
            tuple(float(v) for v in encode_condition(scene, prompt)),
            tuple(ground_truth_grasp(scene, prompt)),
            tag,
        )
    raise SceneGenerationError(
        f"{__name__} ERROR: no {tag} sample for index {index} after "
        f"{MAX_SCENE_RETRIES} scenes"
    )


def generate_samples(
    n: int,
    split: SplitSpec,
    seed: int,
    config: SceneConfig = SceneConfig(),
    threads: int = 1,
    progress: bool = False,
) -> List[Sample]:
    if n < 1:
        raise ValueError(f"{__name__} ERROR: need n >= 1 samples, got {n}")
    if threads < 1:
        raise ValueError(f"{__name__} ERROR: need threads >= 1, got {threads}")

    def make(index: int) -> Sample:
        return make_sample(index, seed, config, split)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = pool.map(make, range(n))
        return list(
            tqdm(results, total=n, disable=not progress, desc="samples")
        )


def _checksum(data: bytes) -> str:
    return hashlib.blake2b(data, digest_size=16).hexdigest()


def build_dataset(
    n: int,
    split: SplitSpec,
    seed: int,
    out_dir,
    config: SceneConfig = SceneConfig(),
    threads: int = 1,
    progress: bool = False,
) -> Dataset:
    """Generate ``n`` samples and write them, with a manifest, into
    ``out_dir``."""
    samples = generate_samples(n, split, seed, config, threads, progress)
    payload = "".join(s.to_json() + "\n" for s in samples).encode("utf-8")
    manifest = {
        "seed": seed,
        "n": n,
        "split": split.mode,
        "config": config.to_dict(),
        "counts": {
            tag: sum(s.split_tag == tag for s in samples)
            for tag in ("seen", "unseen")
        },
        "held_out": [list(pair) for pair in split.held_out],
        "checksum": _checksum(payload),
    }
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / SAMPLES_FILE).write_bytes(payload)
        text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        (out_dir / MANIFEST_FILE).write_text(text, encoding="utf-8")
    except OSError as err:
        raise OSError(
            f"{__name__} ERROR: cannot write dataset to {out_dir}: {err}"
        )
    logger.info(
        f"Wrote {n} samples ({manifest['counts']}) to {out_dir / SAMPLES_FILE}"
    )
    return Dataset(samples, manifest)


def load_dataset(path) -> Dataset:
    """Read a dataset directory (or a bare samples file)."""
    path = Path(path)
    samples_path = path / SAMPLES_FILE if path.is_dir() else path
    manifest_path = samples_path.parent / MANIFEST_FILE
    try:
        with samples_path.open("r", encoding="utf-8") as f_obj:
            samples = [
                Sample.from_dict(json.loads(line))
                for line in f_obj
                if line.strip()
            ]
        manifest = (
            json.loads(manifest_path.read_text(encoding="utf-8"))
            if manifest_path.exists()
            else {}
        )
    except OSError as err:
        raise OSError(
            f"{__name__} ERROR: cannot read dataset {samples_path}: {err}"
        )
    except (KeyError, TypeError, ValueError, IndexError) as err:
        raise DatasetError(
            f"{__name__} ERROR: malformed dataset {samples_path}: {err}"
        )
    if not samples:
        raise DatasetError(
            f"{__name__} ERROR: dataset {samples_path} is empty"
        )
    return Dataset(samples, manifest)


def training_arrays(
    samples: List[Sample], extent: Optional[float] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """(x0, y) rows for training; a sample with G grasps gives G rows."""
    x0, y = [], []
    for sample in samples:
        e = extent if extent is not None else sample.scene.extent
        for g in sample.gt_grasps:
            x0.append(encode_pose(g, e))
            y.append(sample.condition)
    return np.asarray(x0, dtype=float), np.asarray(y, dtype=float)
