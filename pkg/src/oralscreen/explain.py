"""Gradient-weighted activation heatmaps for the diffuse conditions.

The gradient of a class logit is taken with respect to the last backbone
feature maps; per-channel spatial means of that gradient weight the channels,
the rectified weighted sum is upsampled to input resolution and min-max
normalized. Box-form conditions are already localized by the box head, so
requesting a heatmap for one is a usage error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .core import (
    IMAGE_LEVEL_CONDITIONS,
    Condition,
    OralImage,
    PriorProfile,
    TaskForm,
    bilinear_resize,
)
from .errors import MissingArtifactError, WrongTaskError
from .model import ModelParams, _image_tensor, _prior_tensor

HEATMAP_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Heatmap:
    """Normalized relevance map over the model input frame."""

    values: np.ndarray  # (H, W) float32 in [0,1]
    condition: Condition
    raw_min: float
    raw_max: float

    def __post_init__(self) -> None:
        if self.condition.task_form is not TaskForm.IMAGE_LEVEL:
            raise WrongTaskError(
                f"{self.condition.value} is localized by boxes, not heatmaps"
            )
        if self.values.ndim != 2:
            raise ValueError(f"heatmap must be 2-D, got shape {self.values.shape}")
        if not np.all((self.values >= 0.0) & (self.values <= 1.0)):
            raise ValueError("heatmap values must lie in [0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]


def minmax_normalize(raw: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Scale to [0,1]; a constant map becomes all zeros (nothing to rank)."""
    lo = float(raw.min())
    hi = float(raw.max())
    if hi - lo <= 0.0:
        return np.zeros_like(raw, dtype=np.float32), lo, hi
    return ((raw - lo) / (hi - lo)).astype(np.float32), lo, hi


def grad_cam(
    params: ModelParams,
    image: OralImage,
    condition: Condition,
    profile: PriorProfile | None = None,
) -> Heatmap:
    """Relevance heatmap for one diffuse condition at input resolution."""
    if condition.task_form is not TaskForm.IMAGE_LEVEL:
        raise WrongTaskError(
            f"{condition.value} is localized by boxes; heatmaps cover only "
            "image-level conditions"
        )
    cfg = params.config
    if image.height != cfg.input_size or image.width != cfg.input_size:
        raise ValueError(
            f"image is {image.height}x{image.width}, model expects "
            f"{cfg.input_size}x{cfg.input_size}"
        )
    net = params.cached_net()
    with torch.enable_grad():
        _, _, feats, class_logits = net(
            _image_tensor(image), _prior_tensor(profile, cfg), want_internals=True
        )
        logit = class_logits[0, IMAGE_LEVEL_CONDITIONS.index(condition)]
        (grads,) = torch.autograd.grad(logit, feats)
    feat = feats[0].detach().numpy()
    weight = grads[0].mean(axis=(1, 2)).numpy()  # one weight per channel
    cam = np.maximum((weight[:, None, None] * feat).sum(axis=0), 0.0)
    upsampled = bilinear_resize(
        cam.astype(np.float32)[:, :, None], image.height, image.width
    )[:, :, 0]
    values, lo, hi = minmax_normalize(upsampled)
    return Heatmap(values=values, condition=condition, raw_min=lo, raw_max=hi)


def pointing_game(heatmap: Heatmap, truth_region: np.ndarray) -> bool:
    """True iff the heatmap's argmax pixel (first in row-major order on ties)
    falls inside the truth region."""
    region = np.asarray(truth_region, dtype=bool)
    if region.shape != heatmap.values.shape:
        raise ValueError(
            f"region shape {region.shape} does not match heatmap {heatmap.values.shape}"
        )
    idx = int(np.argmax(heatmap.values))
    return bool(region.reshape(-1)[idx])


def save_heatmap(heatmap: Heatmap, path: str | Path) -> None:
    """8-bit grayscale PNG plus a JSON sidecar with normalization bounds."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(
        np.round(heatmap.values * 255.0).astype(np.uint8), mode="L"
    ).save(path, format="PNG")
    sidecar = {
        "schema_version": HEATMAP_SCHEMA_VERSION,
        "condition": heatmap.condition.value,
        "raw_min": heatmap.raw_min,
        "raw_max": heatmap.raw_max,
    }
    with open(path.with_suffix(path.suffix + ".json"), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=1)


def load_heatmap(path: str | Path) -> Heatmap:
    path = Path(path)
    sidecar_path = path.with_suffix(path.suffix + ".json")
    if not path.exists() or not sidecar_path.exists():
        raise MissingArtifactError(f"no heatmap at {path}")
    with Image.open(path) as im:
        values = np.asarray(im.convert("L"), dtype=np.float32) / 255.0
    with open(sidecar_path, "r", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    return Heatmap(
        values=values,
        condition=Condition(sidecar["condition"]),
        raw_min=float(sidecar["raw_min"]),
        raw_max=float(sidecar["raw_max"]),
    )
