"""Condition taxonomy, shared domain types, and image preprocessing.

Everything here is an immutable value type or a pure function; the rest of
the package builds on these. The canonical box format is fractional
(cx, cy, w, h) with the origin at the top-left corner of the image; it is
used verbatim in dataset files, the HTTP API, and the web client.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidGeometryError, WrongTaskError

DEFAULT_INPUT_SIZE = 64

OPERATING_POINT_SCHEMA_VERSION = 1


class TaskForm(enum.Enum):
    """How a condition is detected: with boxes or with an image-level score."""

    LOCALIZED = "localized"
    IMAGE_LEVEL = "image_level"


class Condition(enum.Enum):
    """The five screened oral conditions."""

    PERIODONTAL_DISEASE = "periodontal_disease"
    CARIES = "caries"
    DENTAL_CALCULUS = "dental_calculus"
    SOFT_DEPOSIT = "soft_deposit"
    DISCOLORATION = "discoloration"

    @property
    def task_form(self) -> TaskForm:
        if self in (Condition.SOFT_DEPOSIT, Condition.DISCOLORATION):
            return TaskForm.IMAGE_LEVEL
        return TaskForm.LOCALIZED


#: Canonical orderings; array-valued predictions follow these everywhere.
LOCALIZED_CONDITIONS = (
    Condition.PERIODONTAL_DISEASE,
    Condition.CARIES,
    Condition.DENTAL_CALCULUS,
)
IMAGE_LEVEL_CONDITIONS = (Condition.SOFT_DEPOSIT, Condition.DISCOLORATION)
ALL_CONDITIONS = LOCALIZED_CONDITIONS + IMAGE_LEVEL_CONDITIONS


class ConfidenceLevel(enum.IntEnum):
    """User-facing likelihood bucket; the integer order is the severity order."""

    UNLIKELY = 0
    LIKELY = 1
    VERY_LIKELY = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "ConfidenceLevel":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValueError(f"unknown confidence level {label!r}") from None


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or not 0.0 <= value <= 1.0:
        raise InvalidGeometryError(f"{name}={value!r} must be finite and in [0, 1]")
    return value


@dataclass(frozen=True)
class FracRect:
    """Axis-aligned rectangle in fractional image coordinates (x0, y0, x1, y1)."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        for name in ("x0", "y0", "x1", "y1"):
            _check_unit(name, getattr(self, name))
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise InvalidGeometryError(f"rectangle corners out of order: {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    def contains(self, other: "FracRect") -> bool:
        return (
            self.x0 <= other.x0
            and self.y0 <= other.y0
            and other.x1 <= self.x1
            and other.y1 <= self.y1
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)


FULL_FRAME = FracRect(0.0, 0.0, 1.0, 1.0)


@dataclass(frozen=True)
class GuideGeometry:
    """Capture guides: dashed alignment box and solid crop box, solid inside dashed."""

    dashed_box: FracRect
    solid_box: FracRect

    def __post_init__(self) -> None:
        if not self.dashed_box.contains(self.solid_box):
            raise InvalidGeometryError(
                f"solid box {self.solid_box} not contained in dashed box {self.dashed_box}"
            )


#: Default guide: a dashed frame with a centred crop region. The aspect ratio
#: is configuration, not a fixed property of the capture flow.
DEFAULT_GUIDE = GuideGeometry(
    dashed_box=FracRect(0.05, 0.05, 0.95, 0.95),
    solid_box=FracRect(0.15, 0.15, 0.85, 0.85),
)


@dataclass(frozen=True)
class OralImage:
    """An RGB image with float pixels in [0, 1] plus identity metadata.

    person_id exists solely so dataset splits can stay person-disjoint.
    """

    pixels: np.ndarray
    source_id: str = ""
    person_id: str = ""

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels, dtype=np.float32)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise InvalidGeometryError(f"pixels must be HxWx3, got shape {px.shape}")
        if not np.isfinite(px).all():
            raise InvalidGeometryError("pixels contain non-finite values")
        if px.min() < 0.0 or px.max() > 1.0:
            raise InvalidGeometryError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])


@dataclass(frozen=True)
class BoundingBox:
    """One localized finding: fractional center, size, confidence, condition."""

    cx: float
    cy: float
    w: float
    h: float
    confidence: float
    condition: Condition

    def __post_init__(self) -> None:
        for name in ("cx", "cy", "w", "h", "confidence"):
            _check_unit(name, getattr(self, name))
        if self.condition.task_form is not TaskForm.LOCALIZED:
            raise WrongTaskError(
                f"{self.condition.value} is image-level; boxes only localize "
                "box-form conditions"
            )

    def corners(self) -> tuple[float, float, float, float]:
        """Return (x0, y0, x1, y1) corner coordinates."""
        return (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )

    def contains_point(self, x: float, y: float) -> bool:
        x0, y0, x1, y1 = self.corners()
        return x0 <= x <= x1 and y0 <= y <= y1

    def to_dict(self) -> dict:
        return {
            "condition": self.condition.value,
            "cx": self.cx,
            "cy": self.cy,
            "w": self.w,
            "h": self.h,
            "confidence": self.confidence,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "BoundingBox":
        return cls(
            cx=float(d["cx"]),
            cy=float(d["cy"]),
            w=float(d["w"]),
            h=float(d["h"]),
            confidence=float(d["confidence"]),
            condition=Condition(d["condition"]),
        )


@dataclass(frozen=True)
class ClassScores:
    """Per-condition confidences for the two diffuse conditions.

    These are independent sigmoid-style confidences, not a distribution;
    conditions co-occur, so the two values need not sum to one.
    """

    soft_deposit: float
    discoloration: float

    def __post_init__(self) -> None:
        _check_unit("soft_deposit", self.soft_deposit)
        _check_unit("discoloration", self.discoloration)

    def as_array(self) -> np.ndarray:
        return np.array([self.soft_deposit, self.discoloration], dtype=np.float32)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "ClassScores":
        values = list(values)
        if len(values) != 2:
            raise ValueError(f"expected 2 class scores, got {len(values)}")
        return cls(soft_deposit=float(values[0]), discoloration=float(values[1]))

    def score_for(self, condition: Condition) -> float:
        if condition is Condition.SOFT_DEPOSIT:
            return self.soft_deposit
        if condition is Condition.DISCOLORATION:
            return self.discoloration
        raise WrongTaskError(f"{condition.value} has no image-level class score")


@dataclass(frozen=True)
class OperatingPointTable:
    """Per-condition threshold pair (t1 high, t2 low) mapping scores to levels."""

    thresholds: Mapping[Condition, tuple[float, float]]

    def __post_init__(self) -> None:
        table = {}
        for condition in ALL_CONDITIONS:
            if condition not in self.thresholds:
                raise InvalidGeometryError(
                    f"operating point table missing {condition.value}"
                )
            t1, t2 = self.thresholds[condition]
            t1 = _check_unit(f"{condition.value}.t1", t1)
            t2 = _check_unit(f"{condition.value}.t2", t2)
            if t2 > t1:
                raise InvalidGeometryError(
                    f"{condition.value}: t2={t2} must not exceed t1={t1}"
                )
            table[condition] = (t1, t2)
        object.__setattr__(self, "thresholds", table)

    def pair(self, condition: Condition) -> tuple[float, float]:
        return self.thresholds[condition]

    @classmethod
    def uniform(cls, t1: float, t2: float) -> "OperatingPointTable":
        return cls({c: (t1, t2) for c in ALL_CONDITIONS})

    def to_json(self, config_hash: str | None = None) -> str:
        payload: dict = {
            "schema_version": OPERATING_POINT_SCHEMA_VERSION,
            "thresholds": {
                c.value: {"t1": t1, "t2": t2}
                for c, (t1, t2) in self.thresholds.items()
            },
        }
        if config_hash is not None:
            payload["config_hash"] = config_hash
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "OperatingPointTable":
        payload = json.loads(text)
        entries = payload["thresholds"]
        return cls(
            {
                Condition(name): (float(pair["t1"]), float(pair["t2"]))
                for name, pair in entries.items()
            }
        )


@dataclass(frozen=True)
class PriorProfile:
    """Structured non-image input: questionnaire answers plus symptom drawings.

    answers holds one choice index per question; choice_counts gives each
    question's number of choices (so the one-hot width is self-describing).
    symptom_mask is an (H, W, 2) binary map, channel 0 = pain, channel 1 =
    bleeding, in the coordinate frame of the model input.
    """

    answers: tuple[int, ...]
    symptom_mask: np.ndarray
    choice_counts: tuple[int, ...]

    def __post_init__(self) -> None:
        answers = tuple(int(a) for a in self.answers)
        counts = tuple(int(c) for c in self.choice_counts)
        if len(answers) != len(counts):
            raise InvalidGeometryError(
                f"{len(answers)} answers for {len(counts)} questions"
            )
        for qi, (a, n) in enumerate(zip(answers, counts)):
            if n < 2:
                raise InvalidGeometryError(f"question {qi} has {n} choices")
            if not 0 <= a < n:
                raise InvalidGeometryError(
                    f"answer {a} out of range for question {qi} with {n} choices"
                )
        mask = np.asarray(self.symptom_mask)
        if mask.ndim != 3 or mask.shape[2] != 2:
            raise InvalidGeometryError(
                f"symptom mask must be HxWx2, got shape {mask.shape}"
            )
        mask = mask.astype(np.uint8)
        if not np.isin(mask, (0, 1)).all():
            raise InvalidGeometryError("symptom mask values must be 0 or 1")
        object.__setattr__(self, "answers", answers)
        object.__setattr__(self, "choice_counts", counts)
        object.__setattr__(self, "symptom_mask", mask)

    @property
    def one_hot_width(self) -> int:
        return sum(self.choice_counts)

    def one_hot(self) -> np.ndarray:
        """Flatten answers to a single concatenated one-hot vector."""
        vec = np.zeros(self.one_hot_width, dtype=np.float32)
        offset = 0
        for a, n in zip(self.answers, self.choice_counts):
            vec[offset + a] = 1.0
            offset += n
        return vec


# ---------------------------------------------------------------------------
# Imaging primitives
# ---------------------------------------------------------------------------


def bilinear_resize(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize an HxW or HxWxC array with bilinear sampling at pixel centers.

    Uses the half-pixel convention, so resizing to the same size is the
    identity map.
    """
    pixels = np.asarray(pixels, dtype=np.float32)
    in_h, in_w = pixels.shape[:2]
    if out_h < 1 or out_w < 1:
        raise InvalidGeometryError(f"target size {out_h}x{out_w} must be positive")
    if (in_h, in_w) == (out_h, out_w):
        return pixels.copy()
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (in_h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (in_w / out_w) - 0.5
    return _sample_bilinear(pixels, ys[:, None] + np.zeros((1, out_w)), xs[None, :] + np.zeros((out_h, 1)))


def _sample_bilinear(pixels: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Sample `pixels` at float coordinates (ys, xs), clamping at the borders."""
    in_h, in_w = pixels.shape[:2]
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    fy = (ys - y0).astype(np.float32)
    fx = (xs - x0).astype(np.float32)
    y0c = np.clip(y0, 0, in_h - 1)
    y1c = np.clip(y0 + 1, 0, in_h - 1)
    x0c = np.clip(x0, 0, in_w - 1)
    x1c = np.clip(x0 + 1, 0, in_w - 1)
    if pixels.ndim == 3:
        fy = fy[..., None]
        fx = fx[..., None]
    p00 = pixels[y0c, x0c]
    p01 = pixels[y0c, x1c]
    p10 = pixels[y1c, x0c]
    p11 = pixels[y1c, x1c]
    top = p00 * (1.0 - fx) + p01 * fx
    bottom = p10 * (1.0 - fx) + p11 * fx
    return (top * (1.0 - fy) + bottom * fy).astype(np.float32)


def crop_to_guide(
    image: OralImage,
    guide: GuideGeometry,
    out_size: int = DEFAULT_INPUT_SIZE,
) -> OralImage:
    """Crop the solid-box region and rescale it to a square model input.

    The crop is resampled bilinearly to out_size x out_size; aspect ratio is
    not preserved (the guide is expected to match the configured aspect).
    """
    solid = guide.solid_box
    if solid.width <= 0.0 or solid.height <= 0.0:
        raise InvalidGeometryError(f"degenerate solid box {solid}")
    h, w = image.height, image.width
    # Fractional rect -> pixel-center sampling grid inside the region.
    ys = solid.y0 * h + (np.arange(out_size, dtype=np.float64) + 0.5) * (solid.height * h / out_size) - 0.5
    xs = solid.x0 * w + (np.arange(out_size, dtype=np.float64) + 0.5) * (solid.width * w / out_size) - 0.5
    grid_y = ys[:, None] + np.zeros((1, out_size))
    grid_x = xs[None, :] + np.zeros((out_size, 1))
    cropped = _sample_bilinear(image.pixels, grid_y, grid_x)
    cropped = np.clip(cropped, 0.0, 1.0)
    return OralImage(
        pixels=cropped, source_id=image.source_id, person_id=image.person_id
    )


def level_for_score(
    score: float, condition: Condition, table: OperatingPointTable
) -> ConfidenceLevel:
    """Map a confidence score to unlikely / likely / very_likely via the table."""
    score = _check_unit("score", score)
    t1, t2 = table.pair(condition)
    if score >= t1:
        return ConfidenceLevel.VERY_LIKELY
    if score >= t2:
        return ConfidenceLevel.LIKELY
    return ConfidenceLevel.UNLIKELY


def image_score_from_boxes(
    boxes: Iterable[BoundingBox], condition: Condition
) -> float:
    """Image-wise confidence for a localized condition: max box confidence.

    Returns 0.0 when there are no boxes.
    """
    if condition.task_form is not TaskForm.LOCALIZED:
        raise WrongTaskError(
            f"{condition.value} is image-level; use its class score instead"
        )
    best = 0.0
    for box in boxes:
        if box.condition is not condition:
            raise ValueError(
                f"box condition {box.condition.value} does not match {condition.value}"
            )
        best = max(best, box.confidence)
    return best


# ---------------------------------------------------------------------------
# Stroke rasterization (shared by the service and by synthetic priors)
# ---------------------------------------------------------------------------


def rasterize_polyline(
    points: Sequence[tuple[float, float]],
    height: int,
    width: int,
    radius: float = 1.5,
) -> np.ndarray:
    """Rasterize a fractional-coordinate polyline to a boolean HxW mask.

    A pixel is set when its center lies within `radius` pixels of any
    segment. A single point marks a disc. Points are (x, y) fractions.
    """
    mask = np.zeros((height, width), dtype=bool)
    if len(points) == 0:
        return mask
    pts = np.asarray(
        [(float(x) * width, float(y) * height) for x, y in points], dtype=np.float64
    )
    yy, xx = np.mgrid[0:height, 0:width]
    centers_x = xx + 0.5
    centers_y = yy + 0.5
    if len(pts) == 1:
        segs = [(pts[0], pts[0])]
    else:
        segs = list(zip(pts[:-1], pts[1:]))
    for a, b in segs:
        ab = b - a
        denom = float(ab @ ab)
        dx = centers_x - a[0]
        dy = centers_y - a[1]
        if denom == 0.0:
            dist2 = dx * dx + dy * dy
        else:
            t = np.clip((dx * ab[0] + dy * ab[1]) / denom, 0.0, 1.0)
            px = dx - t * ab[0]
            py = dy - t * ab[1]
            dist2 = px * px + py * py
        mask |= dist2 <= radius * radius
    return mask


def disc_mask(
    center: tuple[float, float], radius_frac: float, height: int, width: int
) -> np.ndarray:
    """Boolean HxW mask of a disc; center is fractional (x, y)."""
    cx = center[0] * width
    cy = center[1] * height
    r = radius_frac * max(height, width)
    yy, xx = np.mgrid[0:height, 0:width]
    return (xx + 0.5 - cx) ** 2 + (yy + 0.5 - cy) ** 2 <= r * r
