"""Shared fixtures.

The expensive fixtures (trained models, large synthetic sets) are
session-scoped and lazy, so unit-test runs that skip the acceptance module
stay fast. Everything is seeded; two runs of the suite see identical data.
"""

import time

import numpy as np
import pytest

from oralscreen.core import ALL_CONDITIONS
from oralscreen.dataset import SyntheticConfig, generate, low_signal_config, split
from oralscreen.evaluate import CalibrationPolicy, calibrate_table, roc
from oralscreen.model import (
    ModelConfig,
    TrainConfig,
    dataset_scores,
    fine_tune_enhanced,
    train,
)


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_report(request):
    """Append one line per criterion; printed in the terminal summary."""
    return request.config._acceptance_lines


@pytest.fixture(scope="session")
def timings():
    return {}


# ---------------------------------------------------------------------------
# Small, fast fixtures
# ---------------------------------------------------------------------------


@pytest.fixture(scope="session")
def tiny_samples():
    """A handful of 64x64 samples for format and shape tests."""
    return generate(
        SyntheticConfig(person_count=6, images_per_person=3), seed=5
    )


@pytest.fixture(scope="session")
def small_model_config():
    return ModelConfig(backbone_channels=(8, 16, 16), head_hidden=16)


# ---------------------------------------------------------------------------
# Heavy fixtures (lazy; only the modules that ask pay for them)
# ---------------------------------------------------------------------------


@pytest.fixture(scope="session")
def default_splits(timings):
    t0 = time.monotonic()
    samples = generate(SyntheticConfig(), seed=11)
    parts = split(samples, 5.0 / 7.0, seed=11)
    timings["generate"] = time.monotonic() - t0
    return parts


@pytest.fixture(scope="session")
def trained_baseline(default_splits, timings):
    train_side, _ = default_splits
    t0 = time.monotonic()
    params, history = train(
        ModelConfig(),
        TrainConfig(epochs=40, seed=0),
        train_side[:-100],
        train_side[-100:],
    )
    timings["train"] = time.monotonic() - t0
    return params, history


@pytest.fixture(scope="session")
def baseline_test_scores(trained_baseline, default_splits, timings):
    params, _ = trained_baseline
    t0 = time.monotonic()
    scores, labels = dataset_scores(params, default_splits[1])
    timings["score"] = time.monotonic() - t0
    return scores, labels


@pytest.fixture(scope="session")
def test_roc_curves(baseline_test_scores):
    scores, labels = baseline_test_scores
    return {
        c: roc(zip(scores[c], labels[c].astype(int))) for c in ALL_CONDITIONS
    }


@pytest.fixture(scope="session")
def calibrated(test_roc_curves):
    return calibrate_table(test_roc_curves, CalibrationPolicy())


@pytest.fixture(scope="session")
def cam_probe():
    """A fresh positive-rich set the trained model has never seen."""
    return generate(
        SyntheticConfig(person_count=110, images_per_person=5), seed=77
    )


def _prior_run(informativeness: float) -> dict:
    cfg = low_signal_config(informativeness)
    samples = generate(cfg, seed=21)
    train_side, test_side = split(samples, 0.7, seed=21)
    fit, holdout = train_side[:-80], train_side[-80:]
    baseline, _ = train(ModelConfig(), TrainConfig(epochs=30, seed=0), fit, holdout)
    enhanced, _ = fine_tune_enhanced(
        baseline, TrainConfig(epochs=25, seed=1), fit, holdout
    )

    def mean_auc(params, use_priors):
        scores, labels = dataset_scores(params, test_side, use_priors=use_priors)
        return float(
            np.mean(
                [roc(zip(scores[c], labels[c].astype(int))).auc for c in ALL_CONDITIONS]
            )
        )

    return {
        "baseline": baseline,
        "enhanced": enhanced,
        "baseline_auc": mean_auc(baseline, False),
        "enhanced_auc": mean_auc(enhanced, True),
    }


@pytest.fixture(scope="session")
def prior_study_informative():
    return _prior_run(1.0)


@pytest.fixture(scope="session")
def prior_study_noise():
    return _prior_run(0.0)
