"""Detection metrics and operating-point selection.

ROC/AUC treats every condition as an image-level ranking problem (box-form
conditions score an image by their max box confidence). FROC measures the
three box-form conditions at box granularity: box-wise sensitivity against
false-positive boxes per image. A predicted box counts as correct when its
center falls inside an unclaimed truth box; intersection-over-union matching
is available behind a flag.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (
    ALL_CONDITIONS,
    LOCALIZED_CONDITIONS,
    BoundingBox,
    Condition,
    OperatingPointTable,
)
from .errors import (
    InfeasiblePolicyError,
    MissingArtifactError,
    UndefinedMetricError,
)

#: Published desk references for the system this package re-creates, kept for
#: documentation and plot annotation only. Synthetic-data results are not
#: comparable to clinical ones.
REFERENCE_MEAN_AUC_BASELINE = 0.775
REFERENCE_MEAN_AUC_ENHANCED = 0.787
REFERENCE_MEAN_BOOST_PERCENT = 1.55
REFERENCE_OPERATING_POINTS = (
    {"sensitivity": 0.668, "false_positive_rate": 0.191},
    {"sensitivity": 0.794, "false_positive_rate": 0.405},
)
REFERENCE_BOX_SENSITIVITY = (0.387, 0.572)


# ---------------------------------------------------------------------------
# ROC
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RocCurve:
    """Operating characteristic over descending thresholds.

    Arrays are aligned: index i gives (threshold, sensitivity, fpr). The
    first entry is a threshold above every score (sens 0, fpr 0); the last
    is threshold 0 (sens 1, fpr 1).
    """

    thresholds: np.ndarray
    sensitivity: np.ndarray
    false_positive_rate: np.ndarray
    auc: float

    def __post_init__(self) -> None:
        n = len(self.thresholds)
        if len(self.sensitivity) != n or len(self.false_positive_rate) != n:
            raise ValueError("curve arrays must have equal length")
        if not 0.0 <= self.auc <= 1.0:
            raise ValueError(f"auc {self.auc} outside [0, 1]")

    def at_threshold(self, t: float) -> tuple[float, float]:
        """(sensitivity, fpr) for classifying score >= t as positive."""
        idx = np.searchsorted(-self.thresholds, -t, side="right") - 1
        idx = int(np.clip(idx, 0, len(self.thresholds) - 1))
        if self.thresholds[idx] < t:
            idx = max(idx - 1, 0)
        return float(self.sensitivity[idx]), float(self.false_positive_rate[idx])


def roc(scored: Iterable[tuple[float, int]]) -> RocCurve:
    """ROC curve and AUC from (score, binary label) pairs.

    Thresholds sweep all distinct scores plus endpoints; AUC is trapezoidal
    over (fpr, sensitivity), which equals the correctly-ranked-pair fraction
    with ties counted one half.
    """
    pairs = list(scored)
    scores = np.array([float(s) for s, _ in pairs])
    labels = np.array([int(l) for _, l in pairs])
    if np.any((labels != 0) & (labels != 1)):
        raise ValueError("labels must be 0 or 1")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            f"ROC needs both classes; got {n_pos} positive / {n_neg} negative"
        )
    order = np.argsort(-scores, kind="stable")
    s_sorted = scores[order]
    l_sorted = labels[order]
    distinct_end = np.nonzero(np.diff(s_sorted))[0]
    cut = np.concatenate([distinct_end, [len(s_sorted) - 1]])
    tp = np.cumsum(l_sorted)[cut]
    fp = np.cumsum(1 - l_sorted)[cut]
    thresholds = s_sorted[cut]
    # Anchor above every score: nothing positive yet.
    top = 1.0 if thresholds[0] < 1.0 else np.nextafter(thresholds[0], np.inf)
    thresholds = np.concatenate([[top], thresholds])
    tp = np.concatenate([[0], tp])
    fp = np.concatenate([[0], fp])
    if thresholds[-1] > 0.0:
        thresholds = np.concatenate([thresholds, [0.0]])
        tp = np.concatenate([tp, [n_pos]])
        fp = np.concatenate([fp, [n_neg]])
    sens = tp / n_pos
    fpr = fp / n_neg
    auc = float(np.trapezoid(sens, fpr))
    return RocCurve(
        thresholds=thresholds.astype(float),
        sensitivity=sens,
        false_positive_rate=fpr,
        auc=auc,
    )


# ---------------------------------------------------------------------------
# Box matching and FROC
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatchResult:
    """Assignment of predicted boxes to truth boxes for one image."""

    true_positives: tuple[tuple[int, int], ...]  # (pred index, truth index)
    false_positives: tuple[int, ...]  # unmatched pred indices
    false_negatives: tuple[int, ...]  # unclaimed truth indices

    @property
    def tp(self) -> int:
        return len(self.true_positives)

    @property
    def fp(self) -> int:
        return len(self.false_positives)

    @property
    def fn(self) -> int:
        return len(self.false_negatives)


def _iou(a: BoundingBox, b: BoundingBox) -> float:
    ax0, ay0, ax1, ay1 = a.corners()
    bx0, by0, bx1, by1 = b.corners()
    iw = max(0.0, min(ax1, bx1) - max(ax0, bx0))
    ih = max(0.0, min(ay1, by1) - max(ay0, by0))
    inter = iw * ih
    union = a.w * a.h + b.w * b.h - inter
    return inter / union if union > 0.0 else 0.0


def match_boxes(
    predicted: Sequence[BoundingBox],
    truth: Sequence[BoundingBox],
    criterion: str = "center",
    iou_floor: float = 0.5,
) -> MatchResult:
    """Greedy one-to-one assignment in descending predicted confidence.

    Under the default center criterion a prediction can claim a truth box
    whose interior contains the predicted center; under "iou" it can claim a
    truth box overlapping at least iou_floor. Ties prefer the earliest truth
    index. Each truth box is claimable once.
    """
    if criterion not in ("center", "iou"):
        raise ValueError(f"unknown matching criterion {criterion!r}")
    order = sorted(
        range(len(predicted)), key=lambda i: (-predicted[i].confidence, i)
    )
    claimed: set[int] = set()
    tps: list[tuple[int, int]] = []
    fps: list[int] = []
    for i in order:
        p = predicted[i]
        chosen = -1
        if criterion == "center":
            for t, tb in enumerate(truth):
                if t not in claimed and tb.contains_point(p.cx, p.cy):
                    chosen = t
                    break
        else:
            best = -1.0
            for t, tb in enumerate(truth):
                if t in claimed:
                    continue
                v = _iou(p, tb)
                if v >= iou_floor and v > best:
                    best = v
                    chosen = t
        if chosen >= 0:
            claimed.add(chosen)
            tps.append((i, chosen))
        else:
            fps.append(i)
    fns = tuple(t for t in range(len(truth)) if t not in claimed)
    return MatchResult(
        true_positives=tuple(tps), false_positives=tuple(fps), false_negatives=fns
    )


@dataclass(frozen=True)
class FrocCurve:
    """Box-wise sensitivity vs false positives per image, thresholds descending."""

    thresholds: np.ndarray
    box_sensitivity: np.ndarray
    false_positives_per_image: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.thresholds)
        if len(self.box_sensitivity) != n or len(self.false_positives_per_image) != n:
            raise ValueError("curve arrays must have equal length")

    def sensitivity_at_fp(self, fp_budget: float) -> float:
        """Highest sensitivity achievable with FP/image <= budget."""
        ok = self.false_positives_per_image <= fp_budget
        return float(self.box_sensitivity[ok].max()) if ok.any() else 0.0


def froc(
    per_image: Sequence[tuple[Sequence[BoundingBox], Sequence[BoundingBox]]],
    criterion: str = "center",
    iou_floor: float = 0.5,
) -> FrocCurve:
    """FROC over (predictions, truths) pairs, one pair per image.

    Thresholds sweep all distinct prediction confidences plus {0, 1},
    descending. At each threshold, predictions below it are dropped, boxes
    are matched per image, and counts aggregate across images.
    """
    if not per_image:
        raise UndefinedMetricError("FROC needs at least one image")
    total_truth = sum(len(t) for _, t in per_image)
    if total_truth == 0:
        raise UndefinedMetricError("FROC needs at least one truth box")
    confs = sorted(
        {float(p.confidence) for preds, _ in per_image for p in preds} | {0.0, 1.0},
        reverse=True,
    )
    thresholds = np.array(confs)
    sens = np.zeros(len(confs))
    fp_rate = np.zeros(len(confs))
    n_images = len(per_image)
    for k, t in enumerate(confs):
        tp = fp = 0
        for preds, truths in per_image:
            kept = [p for p in preds if p.confidence >= t]
            m = match_boxes(kept, truths, criterion=criterion, iou_floor=iou_floor)
            tp += m.tp
            fp += m.fp
        sens[k] = tp / total_truth
        fp_rate[k] = fp / n_images
    return FrocCurve(
        thresholds=thresholds, box_sensitivity=sens, false_positives_per_image=fp_rate
    )


# ---------------------------------------------------------------------------
# Operating-point selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationPolicy:
    """Either a (budget, floor) pair or explicit score quantiles.

    budget mode: t1 is the smallest threshold whose false-positive measure
    (rate for ROC, per-image count for FROC) stays within fp_budget; t2 is
    the largest threshold keeping sensitivity at or above sensitivity_floor.
    quantile mode: thresholds at the given quantiles of the curve's
    threshold range (q1 for t1, q2 for t2).
    """

    fp_budget: float | None = 0.1
    sensitivity_floor: float | None = 0.9
    quantiles: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.quantiles is not None:
            q1, q2 = self.quantiles
            if not (0.0 <= q2 <= q1 <= 1.0):
                raise ValueError("quantiles must satisfy 0 <= q2 <= q1 <= 1")
        elif self.fp_budget is None or self.sensitivity_floor is None:
            raise ValueError("policy needs fp_budget and sensitivity_floor, or quantiles")


@dataclass(frozen=True)
class OperatingPointChoice:
    t1: float
    t2: float
    warnings: tuple[str, ...] = ()


def _curve_series(curve: RocCurve | FrocCurve) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(curve, RocCurve):
        return curve.thresholds, curve.sensitivity, curve.false_positive_rate
    return curve.thresholds, curve.box_sensitivity, curve.false_positives_per_image


def select_operating_points(
    curve: RocCurve | FrocCurve, policy: CalibrationPolicy = CalibrationPolicy()
) -> OperatingPointChoice:
    """Pick (t1, t2) = (very-likely, likely) thresholds per the policy.

    Returns t2 <= t1; when the policy's raw answers violate that, t2 is
    clamped down to t1 and a warning is recorded.
    """
    thresholds, sens, fp = _curve_series(curve)
    if len(thresholds) == 0:
        raise UndefinedMetricError("empty curve")
    notes: list[str] = []
    if policy.quantiles is not None:
        lo, hi = float(thresholds.min()), float(thresholds.max())
        t1 = lo + (hi - lo) * policy.quantiles[0]
        t2 = lo + (hi - lo) * policy.quantiles[1]
    else:
        budget_ok = fp <= policy.fp_budget
        if not budget_ok.any():
            raise InfeasiblePolicyError(
                f"no threshold keeps false positives within {policy.fp_budget}; "
                f"attainable frontier: min fp {fp.min():.4f} at sensitivity "
                f"{sens[np.argmin(fp)]:.4f}"
            )
        # Thresholds are descending: fp is nonincreasing toward index 0.
        t1 = float(thresholds[np.nonzero(budget_ok)[0][-1]])
        floor_ok = sens >= policy.sensitivity_floor
        if not floor_ok.any():
            raise InfeasiblePolicyError(
                f"no threshold reaches sensitivity {policy.sensitivity_floor}; "
                f"attainable frontier: max sensitivity {sens.max():.4f} at "
                f"fp {fp[np.argmax(sens)]:.4f}"
            )
        t2 = float(thresholds[np.nonzero(floor_ok)[0][0]])
    if t2 > t1:
        notes.append(
            f"likely threshold {t2:.6f} exceeded very-likely threshold "
            f"{t1:.6f}; clamped down"
        )
        warnings.warn(notes[-1])
        t2 = t1
    return OperatingPointChoice(t1=t1, t2=t2, warnings=tuple(notes))


def calibrate_table(
    curves: Mapping[Condition, RocCurve | FrocCurve],
    policy: CalibrationPolicy = CalibrationPolicy(),
) -> tuple[OperatingPointTable, dict[Condition, OperatingPointChoice]]:
    """Per-condition operating points for all five conditions."""
    choices = {c: select_operating_points(curves[c], policy) for c in ALL_CONDITIONS}
    table = OperatingPointTable(
        {c: (ch.t1, ch.t2) for c, ch in choices.items()}
    )
    return table, choices


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------


def write_curve_csv(
    curve: RocCurve | FrocCurve, path: str | Path, config_hash: str = ""
) -> None:
    """Curve as CSV; the run's config hash rides in a comment line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    thresholds, sens, fp = _curve_series(curve)
    is_roc = isinstance(curve, RocCurve)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(
            ["threshold", "sensitivity", "false_positive_rate" if is_roc else "false_positives_per_image"]
        )
        for t, s, f in zip(thresholds, sens, fp):
            writer.writerow([f"{t:.8f}", f"{s:.8f}", f"{f:.8f}"])


def metric_summary(
    aucs: Mapping[Condition, float],
    froc_curves: Mapping[Condition, FrocCurve] | None = None,
    config_hash: str = "",
) -> dict:
    """Per-condition AUC summary with the categorized mean, JSON-friendly."""
    per = {c.value: float(aucs[c]) for c in ALL_CONDITIONS if c in aucs}
    summary: dict = {
        "config_hash": config_hash,
        "auc": per,
        "mean_auc": float(np.mean(list(per.values()))) if per else None,
    }
    if froc_curves:
        summary["box_sensitivity_at_1fp"] = {
            c.value: froc_curves[c].sensitivity_at_fp(1.0)
            for c in LOCALIZED_CONDITIONS
            if c in froc_curves
        }
    return summary


def write_metric_summary(summary: Mapping, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dict(summary), fh, indent=1)


def plot_curves(
    roc_curves: Mapping[Condition, RocCurve],
    froc_curves: Mapping[Condition, FrocCurve],
    path: str | Path,
    config_hash: str = "",
) -> None:
    """One PNG with the ROC panel and the FROC panel."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax_roc, ax_froc) = plt.subplots(1, 2, figsize=(11, 4.5))
    for c, curve in roc_curves.items():
        ax_roc.plot(
            curve.false_positive_rate,
            curve.sensitivity,
            label=f"{c.value} (AUC {curve.auc:.3f})",
        )
    ax_roc.plot([0, 1], [0, 1], ls=":", c="gray", lw=1)
    ax_roc.set_xlabel("false positive rate")
    ax_roc.set_ylabel("sensitivity")
    ax_roc.set_title("ROC (image level)")
    ax_roc.legend(fontsize=7)
    for c, curve in froc_curves.items():
        ax_froc.plot(
            curve.false_positives_per_image, curve.box_sensitivity, label=c.value
        )
    ax_froc.set_xlabel("false positives per image")
    ax_froc.set_ylabel("box sensitivity")
    ax_froc.set_title("FROC (box level)")
    ax_froc.legend(fontsize=7)
    fig.suptitle(f"config {config_hash}" if config_hash else "")
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=110, metadata={"config_hash": config_hash})
    plt.close(fig)


def read_curve_csv(path: str | Path) -> RocCurve | FrocCurve:
    """Load a curve written by write_curve_csv; kind inferred from the header."""
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"no curve file at {path}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    header, data = rows[0], rows[1:]
    thresholds = np.array([float(r[0]) for r in data])
    sens = np.array([float(r[1]) for r in data])
    fp = np.array([float(r[2]) for r in data])
    if header[2] == "false_positive_rate":
        return RocCurve(
            thresholds=thresholds,
            sensitivity=sens,
            false_positive_rate=fp,
            auc=float(np.trapezoid(sens, fp)),
        )
    return FrocCurve(
        thresholds=thresholds, box_sensitivity=sens, false_positives_per_image=fp
    )
