"""Scenes of placed objects and the ground-truth grasps they imply."""
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from src.grasp_geometry.rectangle import GraspPose
from src.synthetic_scenes.shapes import SHAPE_CLASSES, Part, part_of, parts_of


class SceneGenerationError(RuntimeError):
    """Raised when objects cannot be placed within the attempt budget."""


@dataclass(frozen=True)
class SceneConfig:
    extent: float = 100.0
    k_max: int = 4
    min_scale: float = 0.18  # fraction of extent
    max_scale: float = 0.25
    separation: float = 0.15  # minimum center distance, fraction of extent
    max_attempts: int = 1000

    def __post_init__(self):
        if not self.extent > 0:
            raise ValueError(f"{__name__} ERROR: extent must be positive")
        if not 1 <= self.k_max <= 6:
            raise ValueError(
                f"{__name__} ERROR: k_max must be in [1, 6], got {self.k_max}"
            )
        if not 0 < self.min_scale <= self.max_scale < 0.5:
            raise ValueError(f"{__name__} ERROR: invalid scale range")

    @property
    def margin(self) -> float:
        """Centers stay this far from the border so whole objects fit."""
        return self.max_scale * self.extent * math.sqrt(2) / 2

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SceneObject:
    shape_class: str
    position: Tuple[float, float]
    scale: float
    rotation: float

    @property
    def parts(self) -> Tuple[Part, ...]:
        return parts_of(self.shape_class)

    def to_scene(self, x: float, y: float) -> Tuple[float, float]:
        """Object-frame point to scene coordinates."""
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        px, py = self.scale * x, self.scale * y
        x0, y0 = self.position
        return (x0 + c * px - s * py, y0 + s * px + c * py)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shape_class": self.shape_class,
            "position": list(self.position),
            "scale": self.scale,
            "rotation": self.rotation,
            "parts": [p.name for p in self.parts],
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "SceneObject":
        return cls(
            doc["shape_class"],
            (float(doc["position"][0]), float(doc["position"][1])),
            float(doc["scale"]),
            float(doc["rotation"]),
        )


@dataclass(frozen=True)
class Scene:
    extent: float
    objects: Tuple[SceneObject, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "extent": self.extent,
            "objects": [o.to_dict() for o in self.objects],
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "Scene":
        return cls(
            float(doc["extent"]),
            tuple(SceneObject.from_dict(o) for o in doc["objects"]),
        )


@dataclass(frozen=True)
class Prompt:
    object_index: int
    part_name: str
    text: str

    @classmethod
    def build(
        cls, scene: Scene, object_index: int, part_name: str
    ) -> "Prompt":
        """Validated prompt "grasp the {shape} at its {part}"."""
        if not 0 <= object_index < len(scene.objects):
            raise ValueError(
                f"{__name__} ERROR: object index {object_index} outside scene "
                f"of {len(scene.objects)} objects"
            )
        shape = scene.objects[object_index].shape_class
        part_of(shape, part_name)
        text = f"grasp the {shape} at its {part_name}"
        return cls(object_index, part_name, text)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "Prompt":
        return cls(int(doc["object_index"]), doc["part_name"], doc["text"])


def min_center_distance(scene: Scene) -> float:
    centers = [o.position for o in scene.objects]
    return min(
        (
            math.dist(a, b)
            for i, a in enumerate(centers)
            for b in centers[i + 1 :]
        ),
        default=math.inf,
    )


def generate_scene(rng: np.random.Generator, config: SceneConfig) -> Scene:
    """Place 1..k_max objects by rejection sampling.

    A placement is rejected when it comes closer than the separation to an
    already placed object. Raises SceneGenerationError once the attempt
    budget is spent.
    """
    extent = config.extent
    n_objects = int(rng.integers(1, config.k_max + 1))
    low, high = config.margin, extent - config.margin
    min_dist = config.separation * extent
    placed: List[SceneObject] = []
    attempts = 0
    while len(placed) < n_objects:
        if attempts >= config.max_attempts:
            raise SceneGenerationError(
                f"{__name__} ERROR: placed {len(placed)} of {n_objects} "
                f"objects in {attempts} attempts"
            )
        attempts += 1
        position = (
            float(rng.uniform(low, high)),
            float(rng.uniform(low, high)),
        )
        if any(math.dist(position, o.position) < min_dist for o in placed):
            continue
        shape_class = SHAPE_CLASSES[int(rng.integers(len(SHAPE_CLASSES)))]
        scale = rng.uniform(config.min_scale, config.max_scale) * extent
        rotation = rng.uniform(-math.pi, math.pi)
        placed.append(
            SceneObject(shape_class, position, float(scale), float(rotation))
        )
    return Scene(float(extent), tuple(placed))


def ground_truth_grasp(scene: Scene, prompt: Prompt) -> List[GraspPose]:
    """The prompted part's canonical grasps, moved by the object's rigid
    motion."""
    if not 0 <= prompt.object_index < len(scene.objects):
        raise ValueError(
            f"{__name__} ERROR: object index {prompt.object_index} outside "
            f"scene of {len(scene.objects)} objects"
        )
    obj = scene.objects[prompt.object_index]
    grasps = []
    part = part_of(obj.shape_class, prompt.part_name)
    for cx, cy, w, h, theta in part.grasps:
        x, y = obj.to_scene(cx, cy)
        grasps.append(
            GraspPose(x, y, obj.scale * w, obj.scale * h, theta + obj.rotation)
        )
    return grasps
