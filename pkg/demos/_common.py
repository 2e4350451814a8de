"""Shared bits for the demo scripts: one cached model, one cached table.

Every demo regenerates its data (seeded, takes seconds) but training is
cached under demos/out/ so the later walkthroughs start instantly after
02_train_and_evaluate.py has run once. Delete demos/out/ to start fresh.
"""

from pathlib import Path

from oralscreen.core import OperatingPointTable
from oralscreen.dataset import SyntheticConfig, generate, split
from oralscreen.evaluate import CalibrationPolicy, calibrate_table, roc
from oralscreen.model import (
    ALL_CONDITIONS,
    ModelConfig,
    ModelParams,
    TrainConfig,
    dataset_scores,
    train,
)

OUT = Path(__file__).resolve().parent / "out"

DEMO_DATA = SyntheticConfig(person_count=70, images_per_person=8)
DEMO_SEED = 11


def demo_split():
    samples = generate(DEMO_DATA, seed=DEMO_SEED)
    return split(samples, 0.7, seed=DEMO_SEED)


def ensure_trained(verbose=True):
    """Train (or load) the shared demo model; returns (params, train, test)."""
    train_side, test_side = demo_split()
    path = OUT / "params.npz"
    if path.exists():
        if verbose:
            print(f"using cached model {path}")
        return ModelParams.load(path), train_side, test_side
    if verbose:
        print("no cached model, training one (about a minute)")
    fit, holdout = train_side[:-60], train_side[-60:]
    params, _ = train(ModelConfig(), TrainConfig(epochs=30, seed=0), fit, holdout)
    OUT.mkdir(parents=True, exist_ok=True)
    params.save(path)
    return params, train_side, test_side


def ensure_table(params, test_side):
    path = OUT / "operating_points.json"
    if path.exists():
        return OperatingPointTable.from_json(path.read_text())
    scores, labels = dataset_scores(params, test_side)
    curves = {c: roc(zip(scores[c], labels[c].astype(int))) for c in ALL_CONDITIONS}
    table, _ = calibrate_table(curves, CalibrationPolicy())
    OUT.mkdir(parents=True, exist_ok=True)
    path.write_text(table.to_json())
    return table
