# 05_calibration.py
# Turn ROC curves into the two-threshold table behind the unlikely / likely /
# very-likely wording, and show what different policies do to the thresholds.

import warnings

from _common import OUT, ensure_trained

from oralscreen.core import ALL_CONDITIONS, level_for_score
from oralscreen.evaluate import (
    CalibrationPolicy,
    calibrate_table,
    roc,
    select_operating_points,
)
from oralscreen.model import dataset_scores

params, _, test_side = ensure_trained()
scores, labels = dataset_scores(params, test_side)
curves = {c: roc(zip(scores[c], labels[c].astype(int))) for c in ALL_CONDITIONS}

print("policy: at most 10% false positives (t1), at least 90% sensitivity (t2)")
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    table, choices = calibrate_table(curves, CalibrationPolicy(0.1, 0.9))
for c in ALL_CONDITIONS:
    t1, t2 = table.pair(c)
    sens1, fpr1 = curves[c].at_threshold(t1)
    sens2, fpr2 = curves[c].at_threshold(t2)
    note = " (clamped)" if choices[c].warnings else ""
    print(f"  {c.value:<20} t1={t1:.3f} sens={sens1:.2f} fpr={fpr1:.2f} | "
          f"t2={t2:.3f} sens={sens2:.2f} fpr={fpr2:.2f}{note}")
if caught:
    # On a nearly perfect model the sensitivity floor is already met at a
    # threshold above the false-positive cut, so the two collapse into one.
    print(f"  note: {len(caught)} threshold pair(s) clamped to t2 = t1")

print("\npolicy: quantiles of the threshold range (65% / 35%)")
quant8 = CalibrationPolicy(quantiles=(0.65, 0.35))
for c in ALL_CONDITIONS[:2]:
    choice = select_operating_points(curves[c], quant8)
    print(f"  {c.value:<20} t1={choice.t1:.3f} t2={choice.t2:.3f}")

path = OUT / "operating_points.json"
path.write_text(table.to_json())
print(f"\nwrote {path}")

demo_scores = (0.95, 0.6, 0.1)
c = ALL_CONDITIONS[0]
t1, t2 = table.pair(c)
print(f"\nscore -> level for {c.value} (t1={t1:.3f}, t2={t2:.3f}):")
for s in demo_scores:
    print(f"  {s:.2f} -> {level_for_score(s, c, table).label}")
