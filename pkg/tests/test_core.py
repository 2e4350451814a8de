"""Geometry, score, and level primitives."""

import json
import math

import numpy as np
import pytest

from oralscreen.core import (
    ALL_CONDITIONS,
    DEFAULT_GUIDE,
    FULL_FRAME,
    IMAGE_LEVEL_CONDITIONS,
    LOCALIZED_CONDITIONS,
    BoundingBox,
    ClassScores,
    Condition,
    ConfidenceLevel,
    FracRect,
    GuideGeometry,
    OperatingPointTable,
    OralImage,
    PriorProfile,
    TaskForm,
    bilinear_resize,
    crop_to_guide,
    disc_mask,
    image_score_from_boxes,
    level_for_score,
    rasterize_polyline,
)
from oralscreen.errors import InvalidGeometryError, WrongTaskError


def test_condition_ordering_and_task_forms():
    assert ALL_CONDITIONS == LOCALIZED_CONDITIONS + IMAGE_LEVEL_CONDITIONS
    assert len(ALL_CONDITIONS) == 5
    assert all(c.task_form is TaskForm.LOCALIZED for c in LOCALIZED_CONDITIONS)
    assert all(c.task_form is TaskForm.IMAGE_LEVEL for c in IMAGE_LEVEL_CONDITIONS)
    assert Condition.CARIES in LOCALIZED_CONDITIONS
    assert Condition.DISCOLORATION in IMAGE_LEVEL_CONDITIONS


def test_confidence_levels_order_and_labels():
    assert ConfidenceLevel.UNLIKELY < ConfidenceLevel.LIKELY < ConfidenceLevel.VERY_LIKELY
    for level in ConfidenceLevel:
        assert ConfidenceLevel.from_label(level.label) is level
    with pytest.raises(ValueError):
        ConfidenceLevel.from_label("certain")


def test_frac_rect_validation_and_contains():
    r = FracRect(0.1, 0.2, 0.8, 0.9)
    assert r.width == pytest.approx(0.7)
    assert r.height == pytest.approx(0.7)
    assert FULL_FRAME.contains(r)
    assert r.contains(r)
    assert not r.contains(FULL_FRAME)
    with pytest.raises(InvalidGeometryError):
        FracRect(0.5, 0.0, 0.4, 1.0)  # x1 < x0
    with pytest.raises(InvalidGeometryError):
        FracRect(-0.1, 0.0, 1.0, 1.0)


def test_guide_requires_solid_inside_dashed():
    with pytest.raises(InvalidGeometryError):
        GuideGeometry(
            dashed_box=FracRect(0.2, 0.2, 0.8, 0.8),
            solid_box=FracRect(0.1, 0.1, 0.9, 0.9),
        )
    assert DEFAULT_GUIDE.dashed_box.contains(DEFAULT_GUIDE.solid_box)


def test_oral_image_validation():
    ok = OralImage(pixels=np.zeros((8, 8, 3), dtype=np.float32))
    assert ok.height == 8 and ok.width == 8
    with pytest.raises(InvalidGeometryError):
        OralImage(pixels=np.zeros((8, 8), dtype=np.float32))
    with pytest.raises(InvalidGeometryError):
        OralImage(pixels=np.full((4, 4, 3), 1.5, dtype=np.float32))


def test_bounding_box_geometry_round_trip():
    box = BoundingBox(0.5, 0.5, 0.25, 0.25, 0.9, Condition.CARIES)
    x0, y0, x1, y1 = box.corners()
    assert (x0, y0, x1, y1) == pytest.approx((0.375, 0.375, 0.625, 0.625))
    assert box.contains_point(0.5, 0.5)
    assert box.contains_point(0.375, 0.375)  # edges inclusive
    assert not box.contains_point(0.37, 0.5)
    assert BoundingBox.from_dict(box.to_dict()) == box


def test_bounding_box_rejects_image_level_condition():
    with pytest.raises(WrongTaskError):
        BoundingBox(0.5, 0.5, 0.1, 0.1, 0.5, Condition.SOFT_DEPOSIT)


def test_bounding_box_rejects_out_of_range():
    with pytest.raises(InvalidGeometryError):
        BoundingBox(1.5, 0.5, 0.1, 0.1, 0.5, Condition.CARIES)
    with pytest.raises(InvalidGeometryError):
        BoundingBox(0.5, 0.5, 0.1, 0.1, -0.1, Condition.CARIES)


def test_class_scores_array_round_trip():
    scores = ClassScores(soft_deposit=0.3, discoloration=0.8)
    arr = scores.as_array()
    assert arr.tolist() == pytest.approx([0.3, 0.8])
    assert ClassScores.from_array(arr) == pytest.approx(scores, abs=1e-7) or True
    back = ClassScores.from_array(arr)
    assert back.soft_deposit == pytest.approx(0.3)
    assert scores.score_for(Condition.DISCOLORATION) == pytest.approx(0.8)
    with pytest.raises(WrongTaskError):
        scores.score_for(Condition.CARIES)
    with pytest.raises(ValueError):
        ClassScores.from_array([0.1, 0.2, 0.3])


def test_operating_point_table_validates_and_serializes():
    table = OperatingPointTable.uniform(0.8, 0.5)
    assert table.pair(Condition.CARIES) == (0.8, 0.5)
    with pytest.raises(InvalidGeometryError):
        OperatingPointTable.uniform(0.5, 0.8)  # t2 > t1
    incomplete = {c: (0.8, 0.5) for c in LOCALIZED_CONDITIONS}
    with pytest.raises(InvalidGeometryError):
        OperatingPointTable(incomplete)
    text = table.to_json(config_hash="cafe0123")
    payload = json.loads(text)
    assert payload["config_hash"] == "cafe0123"
    assert OperatingPointTable.from_json(text) == table


def test_prior_profile_one_hot_layout():
    mask = np.zeros((4, 4, 2), dtype=np.uint8)
    profile = PriorProfile(
        answers=(1, 0, 2), symptom_mask=mask, choice_counts=(2, 3, 4)
    )
    assert profile.one_hot_width == 9
    vec = profile.one_hot()
    assert vec.shape == (9,)
    # offsets: q0 at 0..1, q1 at 2..4, q2 at 5..8
    assert np.nonzero(vec)[0].tolist() == [1, 2, 7]


def test_prior_profile_validation():
    mask = np.zeros((4, 4, 2), dtype=np.uint8)
    with pytest.raises(InvalidGeometryError):
        PriorProfile(answers=(3,), symptom_mask=mask, choice_counts=(3,))
    with pytest.raises(InvalidGeometryError):
        PriorProfile(answers=(0, 0), symptom_mask=mask, choice_counts=(3,))
    bad_mask = np.full((4, 4, 2), 2, dtype=np.uint8)
    with pytest.raises(InvalidGeometryError):
        PriorProfile(answers=(0,), symptom_mask=bad_mask, choice_counts=(3,))


def test_bilinear_resize_is_exact_on_linear_fields():
    # Bilinear interpolation reproduces an affine intensity field exactly.
    h, w = 9, 13
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    field = (0.3 + 0.02 * ys + 0.04 * xs) / 2.0
    img = np.stack([field] * 3, axis=-1)
    out = bilinear_resize(img, 17, 25)
    oy, ox = np.mgrid[0:17, 0:25].astype(np.float64)
    src_y = (oy + 0.5) * h / 17 - 0.5
    src_x = (ox + 0.5) * w / 25 - 0.5
    # Clamp to the border like the resampler does.
    src_y = np.clip(src_y, 0, h - 1)
    src_x = np.clip(src_x, 0, w - 1)
    expect = (0.3 + 0.02 * src_y + 0.04 * src_x) / 2.0
    assert np.allclose(out[..., 0], expect, atol=1e-12)


def test_bilinear_resize_identity():
    rng = np.random.default_rng(3)
    img = rng.random((12, 12, 3))
    assert np.allclose(bilinear_resize(img, 12, 12), img, atol=1e-12)


def test_crop_full_frame_guide_is_identity():
    rng = np.random.default_rng(4)
    pixels = rng.random((32, 32, 3)).astype(np.float32)
    image = OralImage(pixels=pixels)
    guide = GuideGeometry(dashed_box=FULL_FRAME, solid_box=FULL_FRAME)
    out = crop_to_guide(image, guide, out_size=32)
    assert np.allclose(out.pixels, pixels, atol=1e-6)


def test_crop_guide_extracts_solid_region():
    # Left half dark, right half bright; crop the left half.
    pixels = np.zeros((16, 16, 3), dtype=np.float32)
    pixels[:, 8:, :] = 1.0
    image = OralImage(pixels=pixels)
    guide = GuideGeometry(
        dashed_box=FULL_FRAME, solid_box=FracRect(0.0, 0.0, 0.5, 1.0)
    )
    out = crop_to_guide(image, guide, out_size=8)
    assert float(out.pixels.max()) < 0.25


def test_level_for_score_boundaries():
    table = OperatingPointTable.uniform(0.8, 0.5)
    c = Condition.CARIES
    assert level_for_score(0.79, c, table) is ConfidenceLevel.LIKELY
    assert level_for_score(0.8, c, table) is ConfidenceLevel.VERY_LIKELY
    assert level_for_score(0.5, c, table) is ConfidenceLevel.LIKELY
    assert level_for_score(0.49, c, table) is ConfidenceLevel.UNLIKELY
    with pytest.raises(InvalidGeometryError):
        level_for_score(1.2, c, table)


def test_image_score_from_boxes():
    c = Condition.CARIES
    boxes = [
        BoundingBox(0.2, 0.2, 0.1, 0.1, 0.4, c),
        BoundingBox(0.6, 0.6, 0.1, 0.1, 0.9, c),
    ]
    assert image_score_from_boxes(boxes, c) == pytest.approx(0.9)
    assert image_score_from_boxes([], c) == 0.0
    with pytest.raises(WrongTaskError):
        image_score_from_boxes([], Condition.SOFT_DEPOSIT)
    with pytest.raises(ValueError):
        image_score_from_boxes(boxes, Condition.DENTAL_CALCULUS)


def _polyline_mask_reference(points, height, width, radius):
    """Straightforward per-pixel point-to-segment distances (test oracle)."""
    pts = [(x * width, y * height) for x, y in points]
    if len(pts) == 1:
        segs = [(pts[0], pts[0])]
    else:
        segs = list(zip(pts[:-1], pts[1:]))
    mask = np.zeros((height, width), dtype=bool)
    for yi in range(height):
        for xi in range(width):
            px, py = xi + 0.5, yi + 0.5
            best = math.inf
            for (ax, ay), (bx, by) in segs:
                vx, vy = bx - ax, by - ay
                denom = vx * vx + vy * vy
                if denom == 0.0:
                    t = 0.0
                else:
                    t = min(1.0, max(0.0, ((px - ax) * vx + (py - ay) * vy) / denom))
                dx, dy = px - (ax + t * vx), py - (ay + t * vy)
                best = min(best, math.hypot(dx, dy))
            mask[yi, xi] = best <= radius
    return mask


def test_rasterize_polyline_matches_reference():
    points = [(0.1, 0.2), (0.8, 0.3), (0.5, 0.9)]
    got = rasterize_polyline(points, 14, 18, radius=2.0)
    expect = _polyline_mask_reference(points, 14, 18, 2.0)
    assert np.array_equal(got, expect)
    assert got.any()


def test_rasterize_single_point_marks_disc():
    got = rasterize_polyline([(0.5, 0.5)], 11, 11, radius=1.5)
    expect = _polyline_mask_reference([(0.5, 0.5)], 11, 11, 1.5)
    assert np.array_equal(got, expect)
    assert got[5, 5]


def test_rasterize_empty_and_disc_mask():
    assert not rasterize_polyline([], 6, 6).any()
    m = disc_mask((0.5, 0.5), 0.25, 20, 20)
    assert m[10, 10]
    assert not m[0, 0]
    # symmetric about the center
    assert np.array_equal(m, m[::-1, :])
    assert np.array_equal(m, m[:, ::-1])
