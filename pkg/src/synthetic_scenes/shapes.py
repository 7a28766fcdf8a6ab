"""Parametric object library.

Every shape lives in a unit object frame, [-0.5, 0.5]^2, and is built from
named axis-aligned parts. Each part carries the grasp rectangle(s) that
count as ground truth for a prompt naming that part. Object frame
quantities are multiplied by the object's scale when placed in a scene.
"""
import math
from dataclasses import dataclass
from typing import Dict, Tuple

HALF_PI = math.pi / 2

SHAPE_CLASSES = ("bar", "tee", "ell", "disc")

# (shape_class, part_name) combinations that never appear in seen data
DEFAULT_HELD_OUT = (("tee", "head"), ("ell", "handle"))


@dataclass(frozen=True)
class Part:
    name: str
    center: Tuple[float, float]
    size: Tuple[float, float]
    # (cx, cy, w, h, theta) in the object frame
    grasps: Tuple[Tuple[float, float, float, float, float], ...]

    def bounds(self) -> Tuple[float, float, float, float]:
        (cx, cy), (sx, sy) = self.center, self.size
        return (cx - sx / 2, cy - sy / 2, cx + sx / 2, cy + sy / 2)

    def contains(self, x: float, y: float) -> bool:
        x0, y0, x1, y1 = self.bounds()
        return x0 <= x <= x1 and y0 <= y <= y1


def _grasp(cx, cy, theta, w=0.5, h=0.24):
    return (cx, cy, w, h, theta)


SHAPES: Dict[str, Tuple[Part, ...]] = {
    # long bar along the object x-axis
    "bar": (
        Part(
            "handle",
            (-0.325, 0.0),
            (0.35, 0.2),
            (_grasp(-0.325, 0.0, HALF_PI),),
        ),
        Part(
            "body",
            (0.0, 0.0),
            (0.3, 0.2),
            (_grasp(-0.08, 0.0, HALF_PI), _grasp(0.08, 0.0, HALF_PI)),
        ),
        Part(
            "head", (0.325, 0.0), (0.35, 0.2), (_grasp(0.325, 0.0, HALF_PI),)
        ),
    ),
    "tee": (
        Part("head", (0.0, 0.35), (1.0, 0.3), (_grasp(0.0, 0.35, HALF_PI),)),
        Part("handle", (0.0, -0.15), (0.2, 0.7), (_grasp(0.0, -0.2, 0.0),)),
    ),
    "ell": (
        Part("handle", (-0.35, 0.0), (0.3, 1.0), (_grasp(-0.35, 0.05, 0.0),)),
        Part(
            "head", (0.15, -0.35), (0.7, 0.3), (_grasp(0.2, -0.35, HALF_PI),)
        ),
    ),
    "disc": (
        Part(
            "body",
            (0.0, 0.0),
            (0.6, 0.6),
            (_grasp(0.0, 0.0, 0.0, w=1.0, h=0.3),),
        ),
        Part("rim", (0.4, 0.0), (0.2, 0.4), (_grasp(0.4, 0.0, 0.0, w=0.4),)),
    ),
}


def parts_of(shape_class: str) -> Tuple[Part, ...]:
    try:
        return SHAPES[shape_class]
    except KeyError:
        raise ValueError(
            f"{__name__} ERROR: unknown shape class {shape_class!r}"
        )


def part_of(shape_class: str, part_name: str) -> Part:
    for part in parts_of(shape_class):
        if part.name == part_name:
            return part
    raise ValueError(
        f"{__name__} ERROR: shape {shape_class!r} has no part {part_name!r}"
    )


def combinations() -> Tuple[Tuple[str, str], ...]:
    """Every (shape_class, part_name) pair of the library, in fixed order."""
    return tuple((s, p.name) for s in SHAPE_CLASSES for p in SHAPES[s])
