"""Multi-task screening network.

A small CNN backbone feeds two heads: a dense G×G box grid predicting one
candidate box per cell per box-form condition, and a two-way classifier for
the diffuse conditions. Patient-reported priors (questionnaire one-hot plus
pain/bleeding drawings) can be pooled to grid resolution and concatenated
with the backbone features ahead of both heads; a model carrying those extra
fusion channels is called *enhanced*, one without them *baseline*.

All tensors cross module boundaries as numpy arrays; torch is an internal
training/inference engine.
"""

from __future__ import annotations

import json
import math
import zipfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import torch
from torch import nn

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
)
from .dataset import AugmentConfig, Sample, augment
from .errors import (
    ConfigError,
    CorruptParamsError,
    MissingArtifactError,
    MissingPriorsError,
    NumericError,
)

PARAMS_SCHEMA_VERSION = 1

_EPS = 1e-7
_BOX_FIELDS = 5  # x_off, y_off, w, h, confidence


# ---------------------------------------------------------------------------
# Prior encoding
# ---------------------------------------------------------------------------


def encode_priors(
    profile: PriorProfile | None,
    spatial: tuple[int, int],
    width: int | None = None,
) -> np.ndarray:
    """Encode priors as an H×W×(Q+2) feature map.

    The one-hot questionnaire vector (width Q) is replicated to every pixel;
    the two symptom-mask channels follow it. A missing profile yields the
    all-zero neutral map, for which ``width`` must be given.
    """
    h, w = spatial
    if profile is None:
        if width is None:
            raise ValueError("width is required to encode an absent profile")
        return np.zeros((h, w, width), dtype=np.float32)
    mh, mw = profile.symptom_mask.shape[:2]
    if (mh, mw) != (h, w):
        raise ValueError(f"symptom mask is {mh}x{mw}, expected {h}x{w}")
    vec = profile.one_hot()
    if width is not None and vec.size + 2 != width:
        raise ValueError(f"profile encodes {vec.size + 2} channels, expected {width}")
    out = np.empty((h, w, vec.size + 2), dtype=np.float32)
    out[:, :, : vec.size] = vec[None, None, :]
    out[:, :, vec.size :] = profile.symptom_mask.astype(np.float32)
    return out


# ---------------------------------------------------------------------------
# Architecture
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelConfig:
    """Architecture knobs. prior_width 0 means baseline, > 0 enhanced."""

    input_size: int = 64
    backbone_channels: tuple[int, ...] = (16, 32, 64, 64)
    head_hidden: int = 64
    prior_width: int = 0

    def __post_init__(self) -> None:
        if len(self.backbone_channels) < 1:
            raise ConfigError("backbone needs at least one block")
        factor = 2 ** (len(self.backbone_channels) - 1)
        if self.input_size % factor != 0 or self.input_size < factor:
            raise ConfigError(
                f"input_size {self.input_size} incompatible with "
                f"{len(self.backbone_channels)} blocks (downsample x{factor})"
            )
        if self.prior_width < 0:
            raise ConfigError("prior_width must be >= 0")

    @property
    def grid_size(self) -> int:
        return self.input_size // 2 ** (len(self.backbone_channels) - 1)

    @property
    def flag(self) -> str:
        return "enhanced" if self.prior_width > 0 else "baseline"

    def to_dict(self) -> dict:
        return {
            "input_size": self.input_size,
            "backbone_channels": list(self.backbone_channels),
            "head_hidden": self.head_hidden,
            "prior_width": self.prior_width,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ModelConfig":
        return cls(
            input_size=int(d["input_size"]),
            backbone_channels=tuple(int(c) for c in d["backbone_channels"]),
            head_hidden=int(d["head_hidden"]),
            prior_width=int(d["prior_width"]),
        )


class ScreeningNet(nn.Module):
    """Backbone + box head + class head, with optional prior fusion layers.

    Fusion is a parallel convolution over the pooled prior map whose output
    is added to each head's first-layer response. Summing parallel convs is
    algebraically channel concatenation, and it leaves the baseline weight
    arrays untouched so a zero-initialized fusion layer reproduces baseline
    outputs exactly.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        layers: list[nn.Module] = []
        prev = 3
        for i, ch in enumerate(config.backbone_channels):
            layers.append(nn.Conv2d(prev, ch, 3, stride=1 if i == 0 else 2, padding=1))
            layers.append(nn.GroupNorm(math.gcd(4, ch), ch))
            layers.append(nn.ReLU())
            prev = ch
        self.backbone = nn.Sequential(*layers)
        self.box_head = nn.Sequential(
            nn.Conv2d(prev, config.head_hidden, 3, padding=1),
            nn.ReLU(),
            nn.Conv2d(config.head_hidden, _BOX_FIELDS * len(LOCALIZED_CONDITIONS), 1),
        )
        self.class_conv = nn.Sequential(
            nn.Conv2d(prev, config.head_hidden, 3, padding=1),
            nn.ReLU(),
        )
        self.class_fc = nn.Linear(config.head_hidden, len(IMAGE_LEVEL_CONDITIONS))
        if config.prior_width > 0:
            self.box_fusion = nn.Conv2d(
                config.prior_width, config.head_hidden, 3, padding=1, bias=False
            )
            self.class_fusion = nn.Conv2d(
                config.prior_width, config.head_hidden, 3, padding=1, bias=False
            )

    def forward(
        self,
        images: torch.Tensor,
        prior_maps: torch.Tensor | None = None,
        want_internals: bool = False,
    ):
        """images: (B,3,H,W); prior_maps: (B,P,H,W) or None (zeros if P>0)."""
        feats = self.backbone(images)
        g = feats.shape[-1]
        box_h = self.box_head[0](feats)
        class_h = self.class_conv[0](feats)
        if self.config.prior_width > 0:
            if prior_maps is None:
                prior_maps = images.new_zeros(
                    (images.shape[0], self.config.prior_width, *images.shape[2:])
                )
            pooled = nn.functional.adaptive_avg_pool2d(prior_maps, (g, g))
            box_h = box_h + self.box_fusion(pooled)
            class_h = class_h + self.class_fusion(pooled)
        box_logits = self.box_head[2](nn.functional.relu(box_h))
        b = images.shape[0]
        box_grid = (
            torch.sigmoid(box_logits)
            .reshape(b, len(LOCALIZED_CONDITIONS), _BOX_FIELDS, g, g)
            .permute(0, 1, 3, 4, 2)
        )
        class_logits = self.class_fc(nn.functional.relu(class_h).mean(dim=(2, 3)))
        class_scores = torch.sigmoid(class_logits)
        if want_internals:
            return box_grid, class_scores, feats, class_logits
        return box_grid, class_scores


# ---------------------------------------------------------------------------
# Parameter container and checkpoint format
# ---------------------------------------------------------------------------


@dataclass
class ModelParams:
    """Immutable-by-convention bundle of architecture config and weights."""

    config: ModelConfig
    arrays: dict[str, np.ndarray]
    _net: ScreeningNet | None = field(default=None, repr=False, compare=False)

    @property
    def flag(self) -> str:
        return self.config.flag

    def copy(self) -> "ModelParams":
        return ModelParams(
            config=self.config, arrays={k: v.copy() for k, v in self.arrays.items()}
        )

    def build_net(self) -> ScreeningNet:
        """Fresh torch module carrying these weights (eval mode)."""
        net = ScreeningNet(self.config)
        state = {}
        for key, _ in net.state_dict().items():
            if key not in self.arrays:
                raise CorruptParamsError(f"parameter {key!r} missing from checkpoint")
            state[key] = torch.from_numpy(np.ascontiguousarray(self.arrays[key]))
        try:
            net.load_state_dict(state)
        except RuntimeError as exc:
            raise CorruptParamsError(f"parameter shapes do not match config: {exc}") from exc
        net.eval()
        return net

    def cached_net(self) -> ScreeningNet:
        if self._net is None:
            self._net = self.build_net()
        return self._net

    def save(self, path: str | Path) -> None:
        meta = {
            "schema_version": PARAMS_SCHEMA_VERSION,
            "flag": self.flag,
            "config": self.config.to_dict(),
        }
        arrays = {f"param:{k}": v for k, v in self.arrays.items()}
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez(path, __meta__=np.array(json.dumps(meta)), **arrays)
        if path.suffix != ".npz":
            # np.savez appends .npz; keep the caller's exact path.
            path.with_name(path.name + ".npz").replace(path)

    @classmethod
    def load(cls, path: str | Path) -> "ModelParams":
        path = Path(path)
        if not path.exists():
            raise MissingArtifactError(f"no parameter file at {path}")
        try:
            with np.load(path, allow_pickle=False) as data:
                if "__meta__" not in data:
                    raise CorruptParamsError(f"{path} has no metadata entry")
                meta = json.loads(str(data["__meta__"][()]))
                arrays = {
                    k[len("param:") :]: np.array(data[k])
                    for k in data.files
                    if k.startswith("param:")
                }
        except (zipfile.BadZipFile, ValueError, json.JSONDecodeError) as exc:
            raise CorruptParamsError(f"cannot read parameter file {path}: {exc}") from exc
        if meta.get("schema_version") != PARAMS_SCHEMA_VERSION:
            raise CorruptParamsError(
                f"unsupported checkpoint schema_version {meta.get('schema_version')!r}"
            )
        try:
            config = ModelConfig.from_dict(meta["config"])
        except (KeyError, TypeError, ConfigError) as exc:
            raise CorruptParamsError(f"bad architecture config in {path}: {exc}") from exc
        if meta.get("flag") != config.flag:
            raise CorruptParamsError(
                f"flag {meta.get('flag')!r} conflicts with prior_width "
                f"{config.prior_width}"
            )
        for k, v in arrays.items():
            if not np.all(np.isfinite(v)):
                raise CorruptParamsError(f"parameter {k!r} contains non-finite values")
        params = cls(config=config, arrays=arrays)
        params.build_net()  # shape check against the architecture
        return params


def init_params(config: ModelConfig, seed: int) -> ModelParams:
    """Fresh randomly initialized parameters, deterministic in seed."""
    torch.manual_seed(seed)
    net = ScreeningNet(config)
    arrays = {k: v.detach().numpy().copy() for k, v in net.state_dict().items()}
    return ModelParams(config=config, arrays=arrays)


def enhance_params(baseline: ModelParams, prior_width: int) -> ModelParams:
    """Add zero-initialized prior-fusion layers to a baseline.

    Zero initialization makes the enhanced model's outputs exactly equal the
    baseline's until fine-tuning moves the new weights.
    """
    if baseline.config.prior_width > 0:
        raise ConfigError("params are already enhanced")
    if prior_width < 1:
        raise ConfigError("prior_width must be >= 1")
    config = replace(baseline.config, prior_width=prior_width)
    arrays = {k: v.copy() for k, v in baseline.arrays.items()}
    for key in ("box_fusion.weight", "class_fusion.weight"):
        arrays[key] = np.zeros(
            (config.head_hidden, prior_width, 3, 3), dtype=np.float32
        )
    return ModelParams(config=config, arrays=arrays)


# ---------------------------------------------------------------------------
# Inference
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RawPrediction:
    """Pre-threshold network output for one image."""

    box_grid: np.ndarray  # (conditions, G, G, 5), activations in [0,1]
    class_scores: np.ndarray  # (2,) in ALL image-level condition order

    def __post_init__(self) -> None:
        if self.box_grid.ndim != 4 or self.box_grid.shape[0] != len(
            LOCALIZED_CONDITIONS
        ) or self.box_grid.shape[3] != _BOX_FIELDS:
            raise ValueError(f"bad box grid shape {self.box_grid.shape}")
        if self.class_scores.shape != (len(IMAGE_LEVEL_CONDITIONS),):
            raise ValueError(f"bad class score shape {self.class_scores.shape}")
        for name, a in (("box_grid", self.box_grid), ("class_scores", self.class_scores)):
            if not np.all((a >= 0.0) & (a <= 1.0)):
                raise ValueError(f"{name} values must lie in [0, 1]")

    @property
    def grid_size(self) -> int:
        return self.box_grid.shape[1]

    def scores(self) -> ClassScores:
        return ClassScores.from_array(self.class_scores)

    def condition_score(self, condition: Condition) -> float:
        """Image-level score: class score, or max grid confidence for boxes."""
        if condition.task_form is TaskForm.IMAGE_LEVEL:
            return float(self.class_scores[IMAGE_LEVEL_CONDITIONS.index(condition)])
        k = LOCALIZED_CONDITIONS.index(condition)
        return float(self.box_grid[k, :, :, 4].max())


def _image_tensor(image: OralImage) -> torch.Tensor:
    return torch.from_numpy(image.pixels.transpose(2, 0, 1)).unsqueeze(0)


def _prior_tensor(
    profile: PriorProfile | None, config: ModelConfig
) -> torch.Tensor | None:
    if config.prior_width == 0:
        return None
    enc = encode_priors(
        profile, (config.input_size, config.input_size), width=config.prior_width
    )
    return torch.from_numpy(enc.transpose(2, 0, 1)).unsqueeze(0)


def forward(
    params: ModelParams, image: OralImage, profile: PriorProfile | None = None
) -> RawPrediction:
    """Run the network on one preprocessed image.

    Baseline params ignore the profile; enhanced params encode it (or the
    all-zero neutral prior when absent) and fuse it ahead of both heads.
    """
    cfg = params.config
    if image.height != cfg.input_size or image.width != cfg.input_size:
        raise ValueError(
            f"image is {image.height}x{image.width}, model expects "
            f"{cfg.input_size}x{cfg.input_size}"
        )
    net = params.cached_net()
    with torch.no_grad():
        box_grid, class_scores = net(
            _image_tensor(image), _prior_tensor(profile, cfg)
        )
    return RawPrediction(
        box_grid=box_grid[0].numpy().astype(np.float32),
        class_scores=class_scores[0].numpy().astype(np.float32),
    )


def _box_iou(a: BoundingBox, b: BoundingBox) -> float:
    ax0, ay0, ax1, ay1 = a.corners()
    bx0, by0, bx1, by1 = b.corners()
    iw = max(0.0, min(ax1, bx1) - max(ax0, bx0))
    ih = max(0.0, min(ay1, by1) - max(ay0, by0))
    inter = iw * ih
    union = a.w * a.h + b.w * b.h - inter
    return inter / union if union > 0.0 else 0.0


def decode_boxes(
    raw: RawPrediction, conf_floor: float = 0.25, nms_iou: float = 0.45
) -> list[BoundingBox]:
    """Grid activations -> concrete boxes with per-condition greedy NMS.

    Output order is canonical (confidence desc, then condition, cy, cx) so it
    does not depend on grid traversal order.
    """
    if not 0.0 <= conf_floor <= 1.0 or not 0.0 <= nms_iou <= 1.0:
        raise ValueError("conf_floor and nms_iou must lie in [0, 1]")
    g = raw.grid_size
    kept: list[BoundingBox] = []
    for k, cond in enumerate(LOCALIZED_CONDITIONS):
        candidates: list[BoundingBox] = []
        for i in range(g):
            for j in range(g):
                x_off, y_off, w, h, conf = (float(v) for v in raw.box_grid[k, i, j])
                if conf < conf_floor or w <= 0.0 or h <= 0.0:
                    continue
                candidates.append(
                    BoundingBox(
                        cx=(j + x_off) / g,
                        cy=(i + y_off) / g,
                        w=w,
                        h=h,
                        confidence=conf,
                        condition=cond,
                    )
                )
        candidates.sort(key=lambda b: (-b.confidence, b.cy, b.cx))
        while candidates:
            best = candidates.pop(0)
            kept.append(best)
            candidates = [c for c in candidates if _box_iou(best, c) <= nms_iou]
    kept.sort(
        key=lambda b: (
            -b.confidence,
            LOCALIZED_CONDITIONS.index(b.condition),
            b.cy,
            b.cx,
        )
    )
    return kept


# ---------------------------------------------------------------------------
# Loss
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LossWeights:
    coord: float = 5.0
    noobj: float = 0.5


def box_targets(boxes: Sequence[BoundingBox], grid_size: int) -> np.ndarray:
    """Center-cell assignment: (conditions, G, G, 5) regression targets.

    The cell containing a truth box center becomes positive with offsets
    measured inside that cell; at most one target per (condition, cell), first
    box wins.
    """
    t = np.zeros((len(LOCALIZED_CONDITIONS), grid_size, grid_size, _BOX_FIELDS), np.float32)
    for b in boxes:
        k = LOCALIZED_CONDITIONS.index(b.condition)
        j = min(int(b.cx * grid_size), grid_size - 1)
        i = min(int(b.cy * grid_size), grid_size - 1)
        if t[k, i, j, 4] == 1.0:
            continue
        t[k, i, j] = (b.cx * grid_size - j, b.cy * grid_size - i, b.w, b.h, 1.0)
    return t


def loss_components(
    raw: RawPrediction, truth: Sample, weights: LossWeights = LossWeights()
) -> dict[str, float]:
    """Reference loss, sum convention, plain numpy.

    total = coord + obj + noobj + cls where the first three make up the box
    localization loss and cls is the BCE sum over the two diffuse conditions.
    """
    if not np.all(np.isfinite(raw.box_grid)) or not np.all(
        np.isfinite(raw.class_scores)
    ):
        raise NumericError("prediction contains non-finite values")
    g = raw.grid_size
    target = box_targets(truth.boxes, g)
    pred = np.clip(raw.box_grid.astype(np.float64), _EPS, 1.0 - _EPS)
    pos = target[..., 4] == 1.0
    coord = weights.coord * float(
        np.sum((pred[..., :4][pos] - target[..., :4][pos].astype(np.float64)) ** 2)
    )
    obj = float(np.sum(-np.log(pred[..., 4][pos]))) if pos.any() else 0.0
    noobj = weights.noobj * float(np.sum(-np.log(1.0 - pred[..., 4][~pos])))
    scores = np.clip(raw.class_scores.astype(np.float64), _EPS, 1.0 - _EPS)
    labels = truth.labels.as_array().astype(np.float64)
    cls = float(np.sum(-(labels * np.log(scores) + (1.0 - labels) * np.log(1.0 - scores))))
    loc = coord + obj + noobj
    return {
        "coord": coord,
        "obj": obj,
        "noobj": noobj,
        "loc": loc,
        "cls": cls,
        "total": loc + cls,
    }


def loss(
    raw: RawPrediction, truth: Sample, weights: LossWeights = LossWeights()
) -> float:
    return loss_components(raw, truth, weights)["total"]


def _torch_loss(
    box_grid: torch.Tensor,
    class_scores: torch.Tensor,
    target_grids: torch.Tensor,
    target_labels: torch.Tensor,
    weights: LossWeights,
) -> torch.Tensor:
    """Batch-mean mirror of loss_components for the training loop."""
    pred = box_grid.clamp(_EPS, 1.0 - _EPS)
    pos = target_grids[..., 4] == 1.0
    per = pred.new_zeros(box_grid.shape[0])
    coord_sq = ((pred[..., :4] - target_grids[..., :4]) ** 2).sum(dim=-1)
    per = per + weights.coord * (coord_sq * pos).sum(dim=(1, 2, 3))
    per = per - (torch.log(pred[..., 4]) * pos).sum(dim=(1, 2, 3))
    per = per - weights.noobj * (torch.log(1.0 - pred[..., 4]) * (~pos)).sum(dim=(1, 2, 3))
    scores = class_scores.clamp(_EPS, 1.0 - _EPS)
    per = per - (
        target_labels * torch.log(scores)
        + (1.0 - target_labels) * torch.log(1.0 - scores)
    ).sum(dim=1)
    return per.mean()


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 40
    batch_size: int = 32
    learning_rate: float = 2e-3
    seed: int = 0
    weights: LossWeights = LossWeights()
    augment: AugmentConfig = AugmentConfig()

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be >= 1")
        if self.learning_rate < 0.0:
            raise ConfigError("learning_rate must be non-negative")


def _sample_tensors(
    samples: Sequence[Sample], config: ModelConfig, use_priors: bool
) -> tuple[torch.Tensor, torch.Tensor | None, torch.Tensor, torch.Tensor]:
    size = config.input_size
    images = np.stack([s.image.pixels.transpose(2, 0, 1) for s in samples])
    priors = None
    if use_priors and config.prior_width > 0:
        priors = torch.from_numpy(
            np.stack(
                [
                    encode_priors(
                        s.priors, (size, size), width=config.prior_width
                    ).transpose(2, 0, 1)
                    for s in samples
                ]
            )
        )
    grids = torch.from_numpy(
        np.stack([box_targets(s.boxes, config.grid_size) for s in samples])
    )
    labels = torch.from_numpy(np.stack([s.labels.as_array() for s in samples]))
    return torch.from_numpy(images), priors, grids, labels


def _epoch_eval(
    net: ScreeningNet,
    samples: Sequence[Sample],
    config: ModelConfig,
    weights: LossWeights,
    use_priors: bool,
    batch_size: int = 64,
) -> float:
    if not samples:
        return math.nan
    total = 0.0
    with torch.no_grad():
        for lo in range(0, len(samples), batch_size):
            chunk = samples[lo : lo + batch_size]
            images, priors, grids, labels = _sample_tensors(chunk, config, use_priors)
            box_grid, class_scores = net(images, priors)
            total += float(
                _torch_loss(box_grid, class_scores, grids, labels, weights)
            ) * len(chunk)
    return total / len(samples)


def _fit(
    net: ScreeningNet,
    train_set: Sequence[Sample],
    holdout: Sequence[Sample],
    train_config: TrainConfig,
    use_priors: bool,
    trainable: Sequence[torch.nn.Parameter],
) -> list[dict]:
    cfg = net.config
    opt = torch.optim.Adam(trainable, lr=train_config.learning_rate)
    history: list[dict] = []
    best_loss = math.inf
    best_state: dict | None = None
    indices = np.arange(len(train_set))
    for epoch in range(train_config.epochs):
        order_rng = np.random.default_rng(
            np.random.SeedSequence([train_config.seed, epoch, 1])
        )
        order_rng.shuffle(indices)
        net.train()
        epoch_total = 0.0
        for lo in range(0, len(indices), train_config.batch_size):
            batch_idx = indices[lo : lo + train_config.batch_size]
            batch = [
                augment(
                    train_set[i],
                    seed=int(
                        np.random.SeedSequence(
                            [train_config.seed, epoch, 2, int(i)]
                        ).generate_state(1)[0]
                    ),
                    config=train_config.augment,
                )
                for i in batch_idx
            ]
            images, priors, grids, labels = _sample_tensors(batch, cfg, use_priors)
            opt.zero_grad()
            box_grid, class_scores = net(images, priors)
            batch_loss = _torch_loss(
                box_grid, class_scores, grids, labels, train_config.weights
            )
            if not torch.isfinite(batch_loss):
                raise NumericError(f"training diverged at epoch {epoch}")
            batch_loss.backward()
            opt.step()
            epoch_total += float(batch_loss.detach()) * len(batch)
        net.eval()
        train_loss = epoch_total / len(train_set)
        holdout_loss = _epoch_eval(
            net, holdout, cfg, train_config.weights, use_priors
        )
        history.append(
            {"epoch": epoch, "train_loss": train_loss, "holdout_loss": holdout_loss}
        )
        select = holdout_loss if holdout else train_loss
        if not math.isfinite(select):
            raise NumericError(f"holdout loss diverged at epoch {epoch}")
        if select < best_loss:
            best_loss = select
            best_state = {
                k: v.detach().clone() for k, v in net.state_dict().items()
            }
    assert best_state is not None
    net.load_state_dict(best_state)
    return history


def _persist_log(history: Sequence[Mapping], log_path: str | Path | None) -> None:
    if log_path is None:
        return
    path = Path(log_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for row in history:
            fh.write(json.dumps(row) + "\n")


def train(
    model_config: ModelConfig,
    train_config: TrainConfig,
    train_set: Sequence[Sample],
    holdout: Sequence[Sample] = (),
    log_path: str | Path | None = None,
) -> tuple[ModelParams, list[dict]]:
    """Train a baseline model; returns params at the best holdout loss.

    With an empty holdout, selection falls back to training loss. The
    per-epoch losses are returned and, when log_path is given, written as
    JSON lines.
    """
    if not train_set:
        raise ConfigError("train set is empty")
    if model_config.prior_width != 0:
        raise ConfigError("train() builds baselines; prior_width must be 0")
    torch.manual_seed(train_config.seed)
    net = init_params(model_config, train_config.seed).build_net()
    history = _fit(
        net, train_set, holdout, train_config, use_priors=False,
        trainable=list(net.parameters()),
    )
    _persist_log(history, log_path)
    arrays = {k: v.detach().numpy().copy() for k, v in net.state_dict().items()}
    return ModelParams(config=model_config, arrays=arrays), history


def fine_tune_enhanced(
    baseline: ModelParams,
    train_config: TrainConfig,
    train_set: Sequence[Sample],
    holdout: Sequence[Sample] = (),
    log_path: str | Path | None = None,
) -> tuple[ModelParams, list[dict]]:
    """Fine-tune prior-fusion heads on top of a frozen baseline backbone.

    Every train and holdout sample must carry priors. Backbone arrays of the
    result compare bit-equal to the baseline's.
    """
    if not train_set:
        raise ConfigError("train set is empty")
    for s in list(train_set) + list(holdout):
        if s.priors is None:
            raise MissingPriorsError(f"sample {s.source_id!r} has no priors")
    first = train_set[0].priors
    prior_width = first.one_hot_width + 2
    enhanced = enhance_params(baseline, prior_width)
    torch.manual_seed(train_config.seed)
    net = enhanced.build_net()
    trainable = []
    for name, p in net.named_parameters():
        if name.startswith("backbone."):
            p.requires_grad_(False)
        else:
            trainable.append(p)
    history = _fit(
        net, train_set, holdout, train_config, use_priors=True, trainable=trainable
    )
    _persist_log(history, log_path)
    arrays = {k: v.detach().numpy().copy() for k, v in net.state_dict().items()}
    return ModelParams(config=enhanced.config, arrays=arrays), history


# ---------------------------------------------------------------------------
# Batch scoring helpers (shared by eval and the acceptance checks)
# ---------------------------------------------------------------------------


def sample_truth(sample: Sample, condition: Condition) -> float:
    """Binary image-level ground truth for any condition."""
    if condition.task_form is TaskForm.IMAGE_LEVEL:
        return sample.labels.score_for(condition)
    return 1.0 if any(b.condition is condition for b in sample.boxes) else 0.0


def dataset_scores(
    params: ModelParams,
    samples: Sequence[Sample],
    use_priors: bool = False,
    batch_size: int = 64,
) -> tuple[dict[Condition, np.ndarray], dict[Condition, np.ndarray]]:
    """Per-condition image scores and truth labels over a sample list.

    Box-form conditions score as the max grid confidence; diffuse conditions
    as the class head output. use_priors only matters for enhanced params.
    """
    net = params.cached_net()
    cfg = params.config
    scores = {c: np.zeros(len(samples)) for c in ALL_CONDITIONS}
    labels = {c: np.zeros(len(samples)) for c in ALL_CONDITIONS}
    with torch.no_grad():
        for lo in range(0, len(samples), batch_size):
            chunk = samples[lo : lo + batch_size]
            images, priors, _, _ = _sample_tensors(
                chunk, cfg, use_priors and cfg.prior_width > 0
            )
            box_grid, class_scores = net(images, priors)
            conf = box_grid[..., 4].amax(dim=(2, 3)).numpy()
            cls = class_scores.numpy()
            for o, s in enumerate(chunk):
                for k, c in enumerate(LOCALIZED_CONDITIONS):
                    scores[c][lo + o] = conf[o, k]
                for k, c in enumerate(IMAGE_LEVEL_CONDITIONS):
                    scores[c][lo + o] = cls[o, k]
                for c in ALL_CONDITIONS:
                    labels[c][lo + o] = sample_truth(s, c)
    return scores, labels
