# 02_train_and_evaluate.py
# Train the detector on synthetic exams, then measure ROC per condition and
# FROC for the box-form conditions on held-out people. Caches the model under
# demos/out/ for the later walkthroughs.

import json
from pathlib import Path

from _common import DEMO_SEED, OUT, demo_split

from oralscreen.core import ALL_CONDITIONS, LOCALIZED_CONDITIONS
from oralscreen.evaluate import froc, metric_summary, plot_curves, roc, write_curve_csv
from oralscreen.model import (
    ModelConfig,
    TrainConfig,
    dataset_scores,
    decode_boxes,
    forward,
    train,
)

OUT.mkdir(parents=True, exist_ok=True)

train_side, test_side = demo_split()
fit, holdout = train_side[:-60], train_side[-60:]
print(f"{len(fit)} fit / {len(holdout)} holdout / {len(test_side)} test images")

params, history = train(
    ModelConfig(),
    TrainConfig(epochs=30, seed=0),
    fit,
    holdout,
    log_path=OUT / "train_log.jsonl",
)
first, last = history[0], history[-1]
print(f"train loss {first['train_loss']:.2f} -> {last['train_loss']:.2f}, "
      f"best holdout {min(h['holdout_loss'] for h in history):.2f} "
      f"(epoch {min(history, key=lambda h: h['holdout_loss'])['epoch']})")
params.save(OUT / "params.npz")

# Image-level ROC for all five conditions.
scores, labels = dataset_scores(params, test_side)
curves = {}
for c in ALL_CONDITIONS:
    curves[c] = roc(zip(scores[c], labels[c].astype(int)))
    write_curve_csv(curves[c], OUT / f"roc_{c.value}.csv")
    print(f"  AUC {c.value:<20} {curves[c].auc:.3f}")

# Box-level FROC: decoded predictions against truth boxes, per image.
froc_curves = {}
for c in LOCALIZED_CONDITIONS:
    per_image = []
    for s in test_side:
        pred = [b for b in decode_boxes(forward(params, s.image)) if b.condition is c]
        truth = [b for b in s.boxes if b.condition is c]
        per_image.append((pred, truth))
    froc_curves[c] = froc(per_image)
    sens_at_half = froc_curves[c].sensitivity_at_fp(0.5)
    print(f"  FROC {c.value:<19} sensitivity {sens_at_half:.3f} at 0.5 FP/image")

summary = metric_summary({c: curves[c].auc for c in ALL_CONDITIONS}, froc_curves)
(OUT / "metrics.json").write_text(json.dumps(summary, indent=2))
plot_curves(curves, froc_curves, OUT / "curves.png")
print(f"wrote metrics.json and curves.png under {OUT}")
print(f"(data and split are seeded with {DEMO_SEED}; reruns are identical)")
