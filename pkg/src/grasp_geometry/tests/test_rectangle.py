import math

import numpy as np
import pytest

from src.grasp_geometry.rectangle import (
    GraspPose,
    angle_offset,
    canonical_angle,
    decode_pose,
    encode_pose,
    harmonic_mean,
    is_success,
    rect_iou,
    rect_overlap,
)

RASTER_GRID = 1000


def raster_iou(a: GraspPose, b: GraspPose, grid: int) -> float:
    """Pixel-count IoU over the joint bounding box of both rectangles."""
    pts = np.array(a.corners() + b.corners())
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    xs = lo[0] + (np.arange(grid) + 0.5) * (hi[0] - lo[0]) / grid
    ys = lo[1] + (np.arange(grid) + 0.5) * (hi[1] - lo[1]) / grid
    gx, gy = np.meshgrid(xs, ys)

    def inside(r: GraspPose) -> np.ndarray:
        c, s = math.cos(r.theta), math.sin(r.theta)
        dx, dy = gx - r.cx, gy - r.cy
        u = c * dx + s * dy
        v = -s * dx + c * dy
        return (np.abs(u) <= r.w / 2) & (np.abs(v) <= r.h / 2)

    ia, ib = inside(a), inside(b)
    union = np.count_nonzero(ia | ib)
    return np.count_nonzero(ia & ib) / union if union else 0.0


def rigid_motion(g: GraspPose, angle: float, tx: float, ty: float):
    c, s = math.cos(angle), math.sin(angle)
    return GraspPose(
        cx=c * g.cx - s * g.cy + tx,
        cy=s * g.cx + c * g.cy + ty,
        w=g.w,
        h=g.h,
        theta=g.theta + angle,
    )


def test_pose_angle_is_canonical():
    g = GraspPose(1, 1, 1, 1, math.pi / 2)
    assert g.theta == pytest.approx(-math.pi / 2)
    assert GraspPose(1, 1, 1, 1, 3 * math.pi / 4).theta == pytest.approx(
        -math.pi / 4
    )
    for theta in np.linspace(-10, 10, 101):
        assert -math.pi / 2 <= canonical_angle(theta) < math.pi / 2


def test_pose_rejects_non_positive_size():
    with pytest.raises(ValueError):
        GraspPose(0, 0, 0, 1, 0)
    with pytest.raises(ValueError):
        GraspPose(0, 0, 1, -1, 0)


def test_encode_midpoint_is_origin():
    v = encode_pose(GraspPose(50, 50, 50, 50, 0), 100)
    np.testing.assert_allclose(v, np.zeros(5), atol=1e-15)


def test_encode_hand_example():
    v = encode_pose(GraspPose(25, 75, 20, 10, math.pi / 4), 100)
    np.testing.assert_allclose(v, [-0.5, 0.5, -0.6, -0.8, 0.5], atol=1e-12)


def test_encode_center_at_origin():
    v = encode_pose(GraspPose(0, 0, 1, 1, 0), 100)
    assert v[0] == -1 and v[1] == -1


def test_encode_rejects_bad_extent():
    with pytest.raises(ValueError):
        encode_pose(GraspPose(1, 1, 1, 1, 0), 0)


def test_decode_midpoint():
    g = decode_pose(np.zeros(5), 100)
    assert g.as_tuple() == pytest.approx((50, 50, 50, 50, 0))


def test_decode_round_trip(random_pose):
    for _ in range(200):
        g = random_pose()
        back = decode_pose(encode_pose(g, 100), 100)
        assert back.as_tuple() == pytest.approx(g.as_tuple(), abs=1e-9)


def test_decode_clamps_size():
    g = decode_pose([0, 0, -1.2, 0, 0], 100)
    assert g.w == pytest.approx(0.1)


def test_iou_identity_and_disjoint():
    a = GraspPose(0, 0, 2, 2, 0)
    assert rect_iou(a, a) == 1.0
    assert rect_iou(a, GraspPose(10, 10, 2, 2, 0)) == 0.0


def test_iou_axis_aligned_shift():
    iou = rect_iou(GraspPose(0, 0, 2, 2, 0), GraspPose(1, 0, 2, 2, 0))
    assert iou == pytest.approx(1 / 3, abs=1e-12)


def test_iou_symmetric_and_bounded(random_pose):
    for _ in range(300):
        a, b = random_pose(5.0), random_pose(5.0)
        iou = rect_iou(a, b)
        assert 0.0 <= iou <= 1.0
        assert iou == rect_iou(b, a)


def test_iou_invariant_under_rigid_motion(random_pose, rng):
    for _ in range(300):
        a, b = random_pose(4.0), random_pose(4.0)
        angle = float(rng.uniform(-math.pi, math.pi))
        tx, ty = rng.uniform(-20, 20, size=2)
        moved = rect_iou(
            rigid_motion(a, angle, tx, ty), rigid_motion(b, angle, tx, ty)
        )
        assert moved == pytest.approx(rect_iou(a, b), abs=1e-9)


def test_iou_matches_rasterization(random_pose):
    for _ in range(1000):
        a, b = random_pose(3.0), random_pose(3.0)
        expected = raster_iou(a, b, RASTER_GRID)
        assert rect_iou(a, b) == pytest.approx(expected, abs=1e-2)


def test_overlap_flags_degenerate():
    a = GraspPose(0, 0, 1e-7, 1e-7, 0)
    overlap = rect_overlap(a, GraspPose(0, 0, 1, 1, 0))
    assert overlap.degenerate and overlap.iou == 0.0


def test_angle_offset_cases():
    a = GraspPose(0, 0, 1, 1, math.pi / 2 - 0.01)
    b = GraspPose(0, 0, 1, 1, -math.pi / 2 + 0.01)
    assert angle_offset(a, b) == pytest.approx(0.02, abs=1e-12)
    assert angle_offset(a, a) == 0.0
    c = GraspPose(0, 0, 1, 1, 0)
    d = GraspPose(0, 0, 1, 1, math.pi / 4)
    assert angle_offset(c, d) == pytest.approx(math.pi / 4)


def test_angle_offset_symmetric_and_pi_periodic(rng):
    for ta, tb in rng.uniform(-4, 4, size=(200, 2)):
        a, b = GraspPose(0, 0, 1, 1, ta), GraspPose(0, 0, 1, 1, tb)
        shifted = GraspPose(0, 0, 1, 1, ta + math.pi)
        offset = angle_offset(a, b)
        assert 0 <= offset <= math.pi / 2
        assert offset == pytest.approx(angle_offset(b, a), abs=1e-12)
        assert offset == pytest.approx(angle_offset(shifted, b), abs=1e-9)


def test_success_on_exact_ground_truth():
    g = GraspPose(30, 40, 10, 5, 0.3)
    assert is_success(g, [g])


def test_success_requires_iou_above_quarter():
    gt = GraspPose(0, 0, 2, 2, 0)
    # overlap width o gives IoU 2o / (8 - 2o) = 0.24
    shift = 2 - 1.92 / 2.48
    pred = GraspPose(shift, 0, 2, 2, 0)
    assert rect_iou(pred, gt) < 0.25
    assert not is_success(pred, [gt])


def test_success_requires_angle_below_thirty_degrees():
    gt = GraspPose(0, 0, 4, 4, 0)
    pred = GraspPose(0, 0, 4, 4, math.radians(35))
    assert rect_iou(pred, gt) > 0.5
    assert not is_success(pred, [gt])


def test_success_monotone_in_ground_truth_set(random_pose):
    for _ in range(100):
        pred = random_pose(4.0)
        gts = [random_pose(4.0) for _ in range(3)]
        if is_success(pred, gts[:1]):
            assert is_success(pred, gts)


def test_success_rejects_empty_set():
    with pytest.raises(ValueError):
        is_success(GraspPose(0, 0, 1, 1, 0), [])


def test_harmonic_mean():
    assert harmonic_mean(0.5, 0.5) == pytest.approx(0.5)
    assert harmonic_mean(1.0, 0.0) == 0.0
    assert harmonic_mean(0.53, 0.39) == pytest.approx(0.4493, abs=1e-4)
