"""Synthetic oral-exam dataset: generation, splitting, augmentation, storage.

The generator stands in for a private clinical collection. Each box-form
condition is planted as a visually distinct (shape, hue) pattern with a
tight ground-truth box; each diffuse condition perturbs a broad half-frame
field so heatmap-localization tests stay informative:

    periodontal_disease  red-violet disc
    caries               dark brown square
    dental_calculus      yellow triangle
    soft_deposit         pale speckle over one half of the frame
    discoloration        brown tint over one half of the frame

Priors follow the labels with probability ``prior_informativeness`` per
channel and are uniform noise otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from PIL import Image

from . import config as config_mod
from .core import (
    ALL_CONDITIONS,
    IMAGE_LEVEL_CONDITIONS,
    LOCALIZED_CONDITIONS,
    BoundingBox,
    ClassScores,
    Condition,
    OralImage,
    PriorProfile,
    TaskForm,
    _sample_bilinear,
    disc_mask,
)
from .errors import ConfigError, DatasetFormatError, SplitError

DATASET_SCHEMA_VERSION = 1

#: Half-frame field regions used for the diffuse conditions.
FIELD_REGIONS = ("left", "right", "top", "bottom")

_PATTERN_COLORS = {
    Condition.PERIODONTAL_DISEASE: np.array([0.78, 0.08, 0.38], dtype=np.float32),
    Condition.CARIES: np.array([0.13, 0.07, 0.04], dtype=np.float32),
    Condition.DENTAL_CALCULUS: np.array([0.88, 0.80, 0.18], dtype=np.float32),
}
_TINT_COLOR = np.array([0.45, 0.29, 0.13], dtype=np.float32)
_SPECKLE_COLOR = np.array([0.93, 0.89, 0.42], dtype=np.float32)


def region_mask(name: str, height: int, width: int) -> np.ndarray:
    """Boolean mask of a named half-frame region."""
    mask = np.zeros((height, width), dtype=bool)
    if name == "left":
        mask[:, : width // 2] = True
    elif name == "right":
        mask[:, width // 2 :] = True
    elif name == "top":
        mask[: height // 2, :] = True
    elif name == "bottom":
        mask[height // 2 :, :] = True
    else:
        raise ConfigError(f"unknown field region {name!r}")
    return mask


@dataclass(frozen=True)
class PlantedPattern:
    """Generator ground truth: where a condition was actually rendered."""

    condition: Condition
    cx: float
    cy: float
    region: str | None = None

    def to_dict(self) -> dict:
        return {
            "condition": self.condition.value,
            "cx": self.cx,
            "cy": self.cy,
            "region": self.region,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PlantedPattern":
        return cls(
            condition=Condition(d["condition"]),
            cx=float(d["cx"]),
            cy=float(d["cy"]),
            region=d.get("region"),
        )


@dataclass
class Sample:
    """One annotated exam image."""

    image: OralImage
    boxes: list[BoundingBox]
    labels: ClassScores
    priors: PriorProfile | None
    person_id: str
    planted: list[PlantedPattern] = field(default_factory=list)

    @property
    def source_id(self) -> str:
        return self.image.source_id


@dataclass(frozen=True)
class SyntheticConfig:
    """Knobs for the synthetic generator; defaults target desk scale."""

    image_size: int = 64
    person_count: int = 70
    images_per_person: int = 10
    prevalence: Mapping[Condition, float] = None  # type: ignore[assignment]
    prior_informativeness: float = 1.0
    prior_coverage: float = 1.0
    noise: float = 0.02
    pattern_size: tuple[int, int] = (8, 18)
    pattern_alpha: float = 0.9
    tint_strength: float = 0.40
    speckle_count: tuple[int, int] = (45, 90)
    speckle_alpha: float = 0.85

    def __post_init__(self) -> None:
        prevalence = dict(self.prevalence or {})
        for c in ALL_CONDITIONS:
            prevalence.setdefault(c, 0.5)
        object.__setattr__(self, "prevalence", prevalence)

    @property
    def sample_count(self) -> int:
        return self.person_count * self.images_per_person


def low_signal_config(prior_informativeness: float = 1.0) -> SyntheticConfig:
    """Preset with weak visual evidence (heavy noise, faint patterns).

    Baseline models top out well below perfect here, which leaves measurable
    headroom for the prior-fusion pathway; used by the prior-effect studies.
    """
    return SyntheticConfig(
        person_count=50,
        images_per_person=10,
        noise=0.14,
        pattern_alpha=0.45,
        tint_strength=0.16,
        speckle_count=(12, 25),
        pattern_size=(6, 12),
        prior_informativeness=prior_informativeness,
    )


def _validate_config(cfg: SyntheticConfig) -> None:
    if cfg.image_size < 16:
        raise ConfigError(f"image_size {cfg.image_size} too small")
    if cfg.person_count < 1 or cfg.images_per_person < 1:
        raise ConfigError("person_count and images_per_person must be >= 1")
    for c, p in cfg.prevalence.items():
        if not 0.0 <= float(p) <= 1.0:
            raise ConfigError(f"prevalence for {c.value} must lie in [0, 1], got {p}")
    for name in ("prior_informativeness", "prior_coverage"):
        v = getattr(cfg, name)
        if not 0.0 <= float(v) <= 1.0:
            raise ConfigError(f"{name} must lie in [0, 1], got {v}")
    if cfg.noise < 0.0:
        raise ConfigError("noise must be non-negative")


def _quantize(pixels: np.ndarray) -> np.ndarray:
    """Snap to the 8-bit grid so PNG storage round-trips losslessly."""
    return (np.round(np.clip(pixels, 0.0, 1.0) * 255.0) / 255.0).astype(np.float32)


def _background(rng: np.random.Generator, cfg: SyntheticConfig, look: dict) -> np.ndarray:
    s = cfg.image_size
    img = np.empty((s, s, 3), dtype=np.float32)
    # Gum-pink field darkening toward the top, with a person-specific cast.
    grad = np.linspace(0.55, 1.0, s, dtype=np.float32)[:, None]
    base = np.array([0.72, 0.42, 0.40], dtype=np.float32) + look["cast"]
    img[:] = base[None, None, :] * grad[:, :, None]
    # Off-white tooth band across the middle with soft tooth separators.
    band_top = int(s * (0.34 + look["band_offset"]))
    band_bot = int(s * (0.62 + look["band_offset"]))
    tooth = np.array([0.92, 0.90, 0.84], dtype=np.float32) + look["cast"] * 0.5
    img[band_top:band_bot, :, :] = tooth[None, None, :]
    tooth_w = max(6, s // 7)
    for x in range(tooth_w, s, tooth_w):
        img[band_top:band_bot, x - 1 : x + 1, :] *= 0.88
    return np.clip(img, 0.0, 1.0)


def _pattern_mask(
    rng: np.random.Generator, cond: Condition, cfg: SyntheticConfig
) -> np.ndarray:
    s = cfg.image_size
    lo, hi = cfg.pattern_size
    extent = float(rng.uniform(lo, hi))
    margin = extent / 2.0 + 1.0
    cx = float(rng.uniform(margin, s - margin))
    cy = float(rng.uniform(margin, s - margin))
    yy, xx = np.mgrid[0:s, 0:s]
    px = xx + 0.5
    py = yy + 0.5
    if cond is Condition.PERIODONTAL_DISEASE:
        r = extent / 2.0
        return (px - cx) ** 2 + (py - cy) ** 2 <= r * r
    if cond is Condition.CARIES:
        half = extent / 2.0
        return (np.abs(px - cx) <= half) & (np.abs(py - cy) <= half)
    if cond is Condition.DENTAL_CALCULUS:
        # Upward-pointing triangle: apex at top, base at bottom.
        half = extent / 2.0
        top, bot = cy - half, cy + half
        inside_y = (py >= top) & (py <= bot)
        frac = np.clip((py - top) / max(bot - top, 1e-6), 0.0, 1.0)
        return inside_y & (np.abs(px - cx) <= half * frac)
    raise ConfigError(f"{cond.value} is not a box-form condition")


def _plant_pattern(
    rng: np.random.Generator,
    img: np.ndarray,
    cond: Condition,
    cfg: SyntheticConfig,
) -> tuple[BoundingBox, PlantedPattern]:
    s = cfg.image_size
    mask = _pattern_mask(rng, cond, cfg)
    color = np.clip(
        _PATTERN_COLORS[cond] + rng.uniform(-0.04, 0.04, size=3).astype(np.float32),
        0.0,
        1.0,
    )
    a = cfg.pattern_alpha
    img[mask] = img[mask] * (1.0 - a) + color[None, :] * a
    rows = np.any(mask, axis=1).nonzero()[0]
    cols = np.any(mask, axis=0).nonzero()[0]
    y0, y1 = int(rows[0]), int(rows[-1]) + 1
    x0, x1 = int(cols[0]), int(cols[-1]) + 1
    box = BoundingBox(
        cx=(x0 + x1) / (2.0 * s),
        cy=(y0 + y1) / (2.0 * s),
        w=(x1 - x0) / s,
        h=(y1 - y0) / s,
        confidence=1.0,
        condition=cond,
    )
    ys, xs = np.nonzero(mask)
    planted = PlantedPattern(
        condition=cond,
        cx=float((xs.mean() + 0.5) / s),
        cy=float((ys.mean() + 0.5) / s),
    )
    return box, planted


def _apply_field(
    rng: np.random.Generator,
    img: np.ndarray,
    cond: Condition,
    cfg: SyntheticConfig,
) -> PlantedPattern:
    s = cfg.image_size
    region = FIELD_REGIONS[int(rng.integers(len(FIELD_REGIONS)))]
    mask = region_mask(region, s, s)
    if cond is Condition.DISCOLORATION:
        # Full-strength tint over most of the region with a soft ramp near
        # the midline: keeps the field easy to classify while pushing the
        # evidence peak well inside the truth region (a hard edge would put
        # the strongest activation on the boundary itself).
        u = (np.arange(s, dtype=np.float32) + 0.5) / s
        if region == "left":
            depth = np.clip((0.5 - u) / 0.5, 0.0, 1.0)[None, :]
        elif region == "right":
            depth = np.clip((u - 0.5) / 0.5, 0.0, 1.0)[None, :]
        elif region == "top":
            depth = np.clip((0.5 - u) / 0.5, 0.0, 1.0)[:, None]
        else:
            depth = np.clip((u - 0.5) / 0.5, 0.0, 1.0)[:, None]
        ramp = np.clip(depth / 0.4, 0.0, 1.0)
        alpha = (cfg.tint_strength * np.broadcast_to(ramp, (s, s)))[:, :, None]
        tint = np.clip(
            _TINT_COLOR + rng.uniform(-0.03, 0.03, size=3).astype(np.float32), 0.0, 1.0
        )
        img[:] = img * (1.0 - alpha) + tint[None, None, :] * alpha
    elif cond is Condition.SOFT_DEPOSIT:
        lo, hi = cfg.speckle_count
        count = int(rng.integers(lo, hi + 1))
        ys, xs = np.nonzero(mask)
        yy, xx = np.mgrid[0:s, 0:s]
        for _ in range(count):
            k = int(rng.integers(len(ys)))
            r = float(rng.uniform(1.2, 2.6))
            dot = (xx + 0.5 - (xs[k] + 0.5)) ** 2 + (yy + 0.5 - (ys[k] + 0.5)) ** 2 <= r * r
            dot &= mask
            a = cfg.speckle_alpha
            img[dot] = img[dot] * (1.0 - a) + _SPECKLE_COLOR[None, :] * a
    else:
        raise ConfigError(f"{cond.value} is not an image-level condition")
    ys, xs = np.nonzero(mask)
    return PlantedPattern(
        condition=cond,
        cx=float((xs.mean() + 0.5) / s),
        cy=float((ys.mean() + 0.5) / s),
        region=region,
    )


def _synth_priors(
    rng: np.random.Generator,
    cfg: SyntheticConfig,
    present: Mapping[Condition, bool],
    boxes: Sequence[BoundingBox],
    choice_counts: tuple[int, ...],
) -> PriorProfile:
    s = cfg.image_size
    answers: list[int] = []
    for qi, n in enumerate(choice_counts):
        if qi < len(ALL_CONDITIONS):
            cond = ALL_CONDITIONS[qi]
            if rng.random() < cfg.prior_informativeness:
                answers.append(n - 1 if present[cond] else 0)
            else:
                answers.append(int(rng.integers(n)))
        else:
            answers.append(int(rng.integers(n)))
    mask = np.zeros((s, s, 2), dtype=np.uint8)
    symptom_sources = (
        (0, Condition.CARIES),  # pain drawing tracks caries
        (1, Condition.PERIODONTAL_DISEASE),  # bleeding drawing tracks periodontal
    )
    for channel, cond in symptom_sources:
        if rng.random() < cfg.prior_informativeness:
            if present[cond]:
                anchor = next(b for b in boxes if b.condition is cond)
                mask[:, :, channel] |= disc_mask(
                    (anchor.cx, anchor.cy), 0.06, s, s
                ).astype(np.uint8)
        else:
            if rng.random() < 0.3:
                center = (float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.1, 0.9)))
                mask[:, :, channel] |= disc_mask(center, 0.06, s, s).astype(np.uint8)
    return PriorProfile(
        answers=tuple(answers), symptom_mask=mask, choice_counts=choice_counts
    )


def generate(
    config: SyntheticConfig,
    seed: int,
    choice_counts: tuple[int, ...] = config_mod.DEFAULT_CHOICE_COUNTS,
) -> list[Sample]:
    """Render a deterministic synthetic dataset for (config, seed)."""
    _validate_config(config)
    rng = np.random.default_rng(seed)
    samples: list[Sample] = []
    idx = 0
    for p in range(config.person_count):
        person_id = f"person_{p:03d}"
        look = {
            "cast": rng.uniform(-0.04, 0.04, size=3).astype(np.float32),
            "band_offset": float(rng.uniform(-0.05, 0.05)),
        }
        for _ in range(config.images_per_person):
            samples.append(_render_sample(rng, config, look, f"img_{idx:05d}", person_id, choice_counts))
            idx += 1
    return samples


def _render_sample(
    rng: np.random.Generator,
    cfg: SyntheticConfig,
    look: dict,
    source_id: str,
    person_id: str,
    choice_counts: tuple[int, ...],
) -> Sample:
    img = _background(rng, cfg, look)
    present = {c: bool(rng.random() < cfg.prevalence[c]) for c in ALL_CONDITIONS}
    boxes: list[BoundingBox] = []
    planted: list[PlantedPattern] = []
    for cond in LOCALIZED_CONDITIONS:
        if not present[cond]:
            continue
        count = 1 + int(rng.random() < 0.35)
        for _ in range(count):
            box, pat = _plant_pattern(rng, img, cond, cfg)
            boxes.append(box)
            planted.append(pat)
    label_flags = {}
    for cond in IMAGE_LEVEL_CONDITIONS:
        label_flags[cond] = 1.0 if present[cond] else 0.0
        if present[cond]:
            planted.append(_apply_field(rng, img, cond, cfg))
    if cfg.noise > 0.0:
        img = img + rng.normal(0.0, cfg.noise, size=img.shape).astype(np.float32)
    img = _quantize(img)
    priors = None
    if rng.random() < cfg.prior_coverage:
        priors = _synth_priors(rng, cfg, present, boxes, choice_counts)
    return Sample(
        image=OralImage(pixels=img, source_id=source_id, person_id=person_id),
        boxes=boxes,
        labels=ClassScores(
            soft_deposit=label_flags[Condition.SOFT_DEPOSIT],
            discoloration=label_flags[Condition.DISCOLORATION],
        ),
        priors=priors,
        person_id=person_id,
        planted=planted,
    )


# ---------------------------------------------------------------------------
# Person-disjoint splitting
# ---------------------------------------------------------------------------


def split(
    samples: Sequence[Sample], train_fraction: float, seed: int
) -> tuple[list[Sample], list[Sample]]:
    """Split by person so no person_id appears on both sides.

    Persons are shuffled, then assigned whole to the training side until it
    holds at least train_fraction of the images; sizes therefore match the
    requested fraction to within one person's group.
    """
    if not 0.0 <= train_fraction <= 1.0:
        raise ConfigError(f"train_fraction {train_fraction} must lie in [0, 1]")
    for s in samples:
        if not s.person_id:
            raise SplitError(f"sample {s.source_id!r} has no person_id")
    persons: dict[str, list[Sample]] = {}
    for s in samples:
        persons.setdefault(s.person_id, []).append(s)
    if 0.0 < train_fraction < 1.0 and len(persons) < 2:
        raise SplitError(
            f"cannot split {len(persons)} person(s) with fraction {train_fraction}; "
            "need at least two persons"
        )
    order = list(persons)
    rng = np.random.default_rng(seed)
    rng.shuffle(order)
    target = train_fraction * len(samples)
    train: list[Sample] = []
    test: list[Sample] = []
    count = 0
    for pid in order:
        group = persons[pid]
        if count < target:
            train.extend(group)
            count += len(group)
        else:
            test.extend(group)
    return train, test


# ---------------------------------------------------------------------------
# Augmentation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AugmentConfig:
    """Jitter ranges; all-zero ranges make augmentation the identity."""

    max_shift: float = 0.08
    max_rotate_deg: float = 12.0
    scale_range: tuple[float, float] = (0.9, 1.1)
    max_hue_shift: float = 0.03
    saturation_range: tuple[float, float] = (0.85, 1.15)
    exposure_range: tuple[float, float] = (0.85, 1.15)


IDENTITY_AUGMENT = AugmentConfig(
    max_shift=0.0,
    max_rotate_deg=0.0,
    scale_range=(1.0, 1.0),
    max_hue_shift=0.0,
    saturation_range=(1.0, 1.0),
    exposure_range=(1.0, 1.0),
)


def spatial_transform(
    sample: Sample,
    dx: float = 0.0,
    dy: float = 0.0,
    rotate_deg: float = 0.0,
    scale: float = 1.0,
) -> Sample:
    """Apply one affine map (about the frame center) to pixels, boxes, masks.

    Boxes are carried through the map exactly: a mapped box is the axis-
    aligned hull of its mapped corners, whose center equals the mapped
    center. Boxes whose mapped center leaves the frame are dropped.
    """
    if dx == 0.0 and dy == 0.0 and rotate_deg == 0.0 and scale == 1.0:
        return sample
    theta = math.radians(rotate_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    # Forward map in fractional coords: p' = s·R(θ)·(p - c) + c + t
    def fwd(x: float, y: float) -> tuple[float, float]:
        ux, uy = x - 0.5, y - 0.5
        return (
            scale * (cos_t * ux - sin_t * uy) + 0.5 + dx,
            scale * (sin_t * ux + cos_t * uy) + 0.5 + dy,
        )

    h, w = sample.image.height, sample.image.width
    # Inverse map for resampling: p = R(-θ)·(p' - c - t)/s + c
    cols = (np.arange(w, dtype=np.float64) + 0.5) / w
    rows = (np.arange(h, dtype=np.float64) + 0.5) / h
    gx = np.broadcast_to(cols[None, :], (h, w)) - 0.5 - dx
    gy = np.broadcast_to(rows[:, None], (h, w)) - 0.5 - dy
    inv_x = (cos_t * gx + sin_t * gy) / scale + 0.5
    inv_y = (-sin_t * gx + cos_t * gy) / scale + 0.5
    src_x = inv_x * w - 0.5
    src_y = inv_y * h - 0.5
    pixels = np.clip(_sample_bilinear(sample.image.pixels, src_y, src_x), 0.0, 1.0)

    boxes: list[BoundingBox] = []
    for b in sample.boxes:
        x0, y0, x1, y1 = b.corners()
        pts = [fwd(x0, y0), fwd(x1, y0), fwd(x0, y1), fwd(x1, y1)]
        ncx, ncy = fwd(b.cx, b.cy)
        if not (0.0 <= ncx <= 1.0 and 0.0 <= ncy <= 1.0):
            continue
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        boxes.append(
            BoundingBox(
                cx=ncx,
                cy=ncy,
                w=min(max(xs) - min(xs), 1.0),
                h=min(max(ys) - min(ys), 1.0),
                confidence=b.confidence,
                condition=b.condition,
            )
        )

    priors = sample.priors
    if priors is not None:
        nearest_y = np.clip(np.round(src_y).astype(np.int64), 0, h - 1)
        nearest_x = np.clip(np.round(src_x).astype(np.int64), 0, w - 1)
        inside = (src_y >= -0.5) & (src_y <= h - 0.5) & (src_x >= -0.5) & (src_x <= w - 0.5)
        warped = priors.symptom_mask[nearest_y, nearest_x] * inside[:, :, None]
        priors = replace(priors, symptom_mask=warped.astype(np.uint8))

    planted = [
        replace(p, cx=fwd(p.cx, p.cy)[0], cy=fwd(p.cx, p.cy)[1])
        if p.region is None
        else p
        for p in sample.planted
    ]
    return Sample(
        image=OralImage(
            pixels=pixels,
            source_id=sample.image.source_id,
            person_id=sample.image.person_id,
        ),
        boxes=boxes,
        labels=sample.labels,
        priors=priors,
        person_id=sample.person_id,
        planted=planted,
    )


def color_transform(
    sample: Sample,
    hue_shift: float = 0.0,
    saturation: float = 1.0,
    exposure: float = 1.0,
) -> Sample:
    """Hue / saturation / exposure jitter; geometry and labels untouched."""
    if hue_shift == 0.0 and saturation == 1.0 and exposure == 1.0:
        return sample
    from matplotlib.colors import hsv_to_rgb, rgb_to_hsv

    hsv = rgb_to_hsv(sample.image.pixels.astype(np.float64))
    hsv[..., 0] = np.mod(hsv[..., 0] + hue_shift, 1.0)
    hsv[..., 1] = np.clip(hsv[..., 1] * saturation, 0.0, 1.0)
    hsv[..., 2] = np.clip(hsv[..., 2] * exposure, 0.0, 1.0)
    pixels = np.clip(hsv_to_rgb(hsv), 0.0, 1.0).astype(np.float32)
    return Sample(
        image=OralImage(
            pixels=pixels,
            source_id=sample.image.source_id,
            person_id=sample.image.person_id,
        ),
        boxes=list(sample.boxes),
        labels=sample.labels,
        priors=sample.priors,
        person_id=sample.person_id,
        planted=list(sample.planted),
    )


def augment(
    sample: Sample, seed: int, config: AugmentConfig = AugmentConfig()
) -> Sample:
    """Random spatial and color jitter, deterministic in (sample, seed, config)."""
    rng = np.random.default_rng(seed)
    dx = float(rng.uniform(-config.max_shift, config.max_shift))
    dy = float(rng.uniform(-config.max_shift, config.max_shift))
    rot = float(rng.uniform(-config.max_rotate_deg, config.max_rotate_deg))
    scale = float(rng.uniform(*config.scale_range))
    hue = float(rng.uniform(-config.max_hue_shift, config.max_hue_shift))
    sat = float(rng.uniform(*config.saturation_range))
    expo = float(rng.uniform(*config.exposure_range))
    out = spatial_transform(sample, dx=dx, dy=dy, rotate_deg=rot, scale=scale)
    return color_transform(out, hue_shift=hue, saturation=sat, exposure=expo)


# ---------------------------------------------------------------------------
# On-disk format
# ---------------------------------------------------------------------------
#
# <root>/annotations.json        header + one record per sample
# <root>/images/<id>.png         8-bit RGB, lossless for quantized pixels
# <root>/masks/<id>.png          symptom mask, R=pain, G=bleeding (if priors)


def _save_png(path: Path, pixels: np.ndarray) -> None:
    Image.fromarray(
        np.round(np.clip(pixels, 0.0, 1.0) * 255.0).astype(np.uint8), mode="RGB"
    ).save(path, format="PNG")


def _load_png(path: Path) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float32)
    return arr / 255.0


def save_dataset(samples: Sequence[Sample], root: str | Path) -> None:
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    records = []
    seen: set[str] = set()
    mask_dir_made = False
    for s in samples:
        sid = s.source_id
        if not sid or sid in seen:
            raise DatasetFormatError(f"duplicate or empty sample id {sid!r}")
        seen.add(sid)
        _save_png(root / "images" / f"{sid}.png", s.image.pixels)
        record: dict = {
            "id": sid,
            "person_id": s.person_id,
            "image_file": f"images/{sid}.png",
            "boxes": [b.to_dict() for b in s.boxes],
            "labels": {
                "soft_deposit": int(s.labels.soft_deposit),
                "discoloration": int(s.labels.discoloration),
            },
            "planted": [p.to_dict() for p in s.planted],
            "priors": None,
        }
        if s.priors is not None:
            if not mask_dir_made:
                (root / "masks").mkdir(exist_ok=True)
                mask_dir_made = True
            mask_rgb = np.zeros((*s.priors.symptom_mask.shape[:2], 3), dtype=np.float32)
            mask_rgb[:, :, :2] = s.priors.symptom_mask
            _save_png(root / "masks" / f"{sid}.png", mask_rgb)
            record["priors"] = {
                "answers": list(s.priors.answers),
                "choice_counts": list(s.priors.choice_counts),
                "mask_file": f"masks/{sid}.png",
            }
        records.append(record)
    header = {
        "schema_version": DATASET_SCHEMA_VERSION,
        "sample_count": len(records),
        "samples": records,
    }
    with open(root / "annotations.json", "w", encoding="utf-8") as fh:
        json.dump(header, fh, indent=1)


def _parse_labels(sid: str, raw: Mapping) -> ClassScores:
    values = {}
    for name in ("soft_deposit", "discoloration"):
        if name not in raw:
            raise DatasetFormatError(f"sample {sid}: labels.{name} missing")
        v = raw[name]
        if v not in (0, 1, 0.0, 1.0):
            raise DatasetFormatError(
                f"sample {sid}: labels.{name}={v!r} is not a binary flag"
            )
        values[name] = float(v)
    return ClassScores(**values)


def load_dataset(root: str | Path) -> list[Sample]:
    root = Path(root)
    ann = root / "annotations.json"
    if not ann.exists():
        raise DatasetFormatError(f"no annotations.json under {root}")
    with open(ann, "r", encoding="utf-8") as fh:
        header = json.load(fh)
    version = header.get("schema_version")
    if version != DATASET_SCHEMA_VERSION:
        raise DatasetFormatError(f"unsupported dataset schema_version {version!r}")
    samples: list[Sample] = []
    for record in header.get("samples", []):
        sid = record.get("id", "<missing id>")
        try:
            boxes = [BoundingBox.from_dict(b) for b in record.get("boxes", [])]
        except (KeyError, ValueError) as exc:
            raise DatasetFormatError(f"sample {sid}: bad box record: {exc}") from exc
        for b in boxes:
            if b.condition.task_form is not TaskForm.LOCALIZED:
                raise DatasetFormatError(
                    f"sample {sid}: box for image-level condition {b.condition.value}"
                )
        labels = _parse_labels(sid, record.get("labels", {}))
        pixels = _load_png(root / record["image_file"])
        priors = None
        raw_priors = record.get("priors")
        if raw_priors is not None:
            mask_rgb = _load_png(root / raw_priors["mask_file"])
            mask = (mask_rgb[:, :, :2] > 0.5).astype(np.uint8)
            try:
                priors = PriorProfile(
                    answers=tuple(int(a) for a in raw_priors["answers"]),
                    symptom_mask=mask,
                    choice_counts=tuple(int(c) for c in raw_priors["choice_counts"]),
                )
            except ValueError as exc:
                raise DatasetFormatError(f"sample {sid}: bad priors: {exc}") from exc
        planted = [PlantedPattern.from_dict(p) for p in record.get("planted", [])]
        samples.append(
            Sample(
                image=OralImage(
                    pixels=pixels, source_id=sid, person_id=record.get("person_id", "")
                ),
                boxes=boxes,
                labels=labels,
                priors=priors,
                person_id=record.get("person_id", ""),
                planted=planted,
            )
        )
    return samples
