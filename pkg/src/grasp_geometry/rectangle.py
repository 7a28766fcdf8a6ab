"""Grasp rectangles: normalization, overlap and the success predicate.

A grasp is a 5-DoF oriented rectangle (cx, cy, w, h, theta). ``w`` is the
gripper opening, measured along the rectangle's own x-axis which is rotated
by ``theta``; ``h`` is the plate length along the perpendicular axis.
"""
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

HALF_PI = math.pi / 2
IOU_THRESHOLD = 0.25
ANGLE_THRESHOLD = math.pi / 6
SIZE_FLOOR = 1e-3  # fraction of the scene extent
DEGENERATE_AREA = 1e-12

Point = Tuple[float, float]


def canonical_angle(theta: float) -> float:
    """Reduce an angle modulo pi into [-pi/2, pi/2)."""
    if -HALF_PI <= theta < HALF_PI:
        return float(theta)
    reduced = math.fmod(theta + HALF_PI, math.pi)
    if reduced < 0:
        reduced += math.pi
    if reduced >= math.pi:
        reduced -= math.pi
    return reduced - HALF_PI


@dataclass(frozen=True)
class GraspPose:
    cx: float
    cy: float
    w: float
    h: float
    theta: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(
                f"{__name__} ERROR: grasp size must be positive, got "
                f"w={self.w}, h={self.h}"
            )
        object.__setattr__(self, "theta", canonical_angle(self.theta))

    def as_tuple(self) -> Tuple[float, float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h, self.theta)

    def corners(self) -> List[Point]:
        """Counter-clockwise corners of the rectangle."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        hw, hh = self.w / 2, self.h / 2
        local = [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
        return [
            (self.cx + c * x - s * y, self.cy + s * x + c * y)
            for x, y in local
        ]

    def area(self) -> float:
        return self.w * self.h


class Overlap(NamedTuple):
    iou: float
    degenerate: bool


def _check_extent(scene_extent: float) -> None:
    if not scene_extent > 0:
        raise ValueError(
            f"{__name__} ERROR: scene extent must be positive, "
            f"got {scene_extent}"
        )


def encode_pose(g: GraspPose, scene_extent: float) -> np.ndarray:
    """Map a grasp in scene units to its normalized 5-vector."""
    _check_extent(scene_extent)
    e = float(scene_extent)
    return np.array(
        [
            2 * g.cx / e - 1,
            2 * g.cy / e - 1,
            2 * g.w / e - 1,
            2 * g.h / e - 1,
            g.theta / HALF_PI,
        ]
    )


def decode_pose(v: Sequence[float], scene_extent: float) -> GraspPose:
    """Inverse of encode_pose, total on any real 5-vector.

    Non-positive sizes are clamped to ``SIZE_FLOOR * scene_extent``.
    """
    _check_extent(scene_extent)
    e = float(scene_extent)
    v = [float(x) for x in v]
    if len(v) != 5:
        raise ValueError(
            f"{__name__} ERROR: pose vector must have 5 entries, got {len(v)}"
        )
    floor = SIZE_FLOOR * e
    w = (v[2] + 1) * e / 2
    h = (v[3] + 1) * e / 2
    return GraspPose(
        cx=(v[0] + 1) * e / 2,
        cy=(v[1] + 1) * e / 2,
        w=w if w > 0 else floor,
        h=h if h > 0 else floor,
        theta=v[4] * HALF_PI,
    )


def polygon_area(polygon: Sequence[Point]) -> float:
    """Shoelace area of a simple polygon."""
    n = len(polygon)
    if n < 3:
        return 0.0
    total = 0.0
    for i in range(n):
        x0, y0 = polygon[i]
        x1, y1 = polygon[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return abs(total) / 2


def clip_polygon(
    subject: Sequence[Point], clipper: Sequence[Point]
) -> List[Point]:
    """Sutherland-Hodgman clipping of ``subject`` by a convex CCW polygon."""
    output = list(subject)
    cp1 = clipper[-1]
    for cp2 in clipper:
        if not output:
            return []
        ex, ey = cp2[0] - cp1[0], cp2[1] - cp1[1]

        def side(p: Point) -> float:
            # >= 0 means left of (or on) the directed edge cp1 -> cp2
            return ex * (p[1] - cp1[1]) - ey * (p[0] - cp1[0])

        candidates = output
        output = []
        s = candidates[-1]
        side_s = side(s)
        for e in candidates:
            side_e = side(e)
            if side_e >= 0:
                if side_s < 0:
                    output.append(_crossing(s, e, side_s, side_e))
                output.append(e)
            elif side_s >= 0:
                output.append(_crossing(s, e, side_s, side_e))
            s, side_s = e, side_e
        cp1 = cp2
    return output


def _crossing(s: Point, e: Point, side_s: float, side_e: float) -> Point:
    denom = side_s - side_e
    if denom == 0:
        return e
    u = min(max(side_s / denom, 0.0), 1.0)
    return (s[0] + u * (e[0] - s[0]), s[1] + u * (e[1] - s[1]))


def rect_overlap(a: GraspPose, b: GraspPose) -> Overlap:
    """IoU of two oriented rectangles together with a degeneracy flag."""
    area_a, area_b = a.area(), b.area()
    if area_a <= DEGENERATE_AREA or area_b <= DEGENERATE_AREA:
        return Overlap(0.0, True)
    if a == b:
        return Overlap(1.0, False)
    inter = polygon_area(clip_polygon(a.corners(), b.corners()))
    union = area_a + area_b - inter
    if union <= DEGENERATE_AREA:
        return Overlap(0.0, True)
    return Overlap(min(max(inter / union, 0.0), 1.0), False)


def rect_iou(a: GraspPose, b: GraspPose) -> float:
    """Intersection over union of two oriented rectangles, in [0, 1].

    Computed on the canonical argument order so the result is symmetric to
    the last bit.
    """
    if b.as_tuple() < a.as_tuple():
        a, b = b, a
    return rect_overlap(a, b).iou


def angle_offset(a: GraspPose, b: GraspPose) -> float:
    """Smallest rotation between two grasps under pi-periodicity."""
    d = math.fmod(abs(a.theta - b.theta), math.pi)
    return min(d, math.pi - d)


def is_success(pred: GraspPose, gts: Sequence[GraspPose]) -> bool:
    """Best-of-set match: IoU above 25% and angle offset below 30 degrees."""
    if len(gts) == 0:
        raise ValueError(f"{__name__} ERROR: ground-truth list is empty")
    return any(
        rect_iou(pred, g) > IOU_THRESHOLD
        and angle_offset(pred, g) < ANGLE_THRESHOLD
        for g in gts
    )


def harmonic_mean(seen: float, unseen: float) -> float:
    if seen <= 0 or unseen <= 0:
        return 0.0
    return 2 * seen * unseen / (seen + unseen)
