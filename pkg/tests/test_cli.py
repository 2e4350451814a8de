"""End-to-end pipeline through the command line."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from oralscreen.cli import main
from oralscreen.core import ALL_CONDITIONS, LOCALIZED_CONDITIONS, OperatingPointTable
from oralscreen.dataset import load_dataset
from oralscreen.model import ModelParams

RUNNER = CliRunner()

CONFIG_YAML = """
dataset:
  person_count: 8
  images_per_person: 3
model:
  backbone_channels: [8, 16, 16]
  head_hidden: 16
train:
  epochs: 2
  batch_size: 16
"""


def _run(*args):
    result = RUNNER.invoke(main, list(args), catch_exceptions=False)
    assert result.exit_code == 0, result.output + getattr(result, "stderr", "")
    return result


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """gen-data -> train -> finetune -> eval -> calibrate -> infer, tiny sizes."""
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "run.yaml"
    cfg.write_text(CONFIG_YAML)
    data = root / "data"
    base = root / "base"
    enh = root / "enh"
    ev = root / "eval"
    cal = root / "cal"
    inf = root / "infer"
    _run("gen-data", "--out", str(data), "--seed", "3", "--config", str(cfg))
    _run(
        "train",
        "--data", str(data),
        "--out", str(base),
        "--seed", "0",
        "--config", str(cfg),
    )
    _run(
        "finetune",
        "--data", str(data),
        "--baseline", str(base / "params.npz"),
        "--out", str(enh),
        "--seed", "1",
        "--config", str(cfg),
    )
    _run(
        "eval",
        "--data", str(data),
        "--params", str(base / "params.npz"),
        "--out", str(ev),
    )
    _run(
        "calibrate",
        "--eval-dir", str(ev),
        "--out", str(cal),
        "--fp-budget", "0.5",
        "--sensitivity-floor", "0.5",
    )
    image = sorted((data / "images").glob("*.png"))[0]
    _run(
        "infer",
        "--params", str(base / "params.npz"),
        "--table", str(cal / "operating_points.json"),
        "--image", str(image),
        "--out", str(inf),
        "--conf-floor", "0.0",
    )
    return {
        "root": root,
        "data": data,
        "base": base,
        "enh": enh,
        "eval": ev,
        "cal": cal,
        "infer": inf,
    }


def test_gen_data_outputs(pipeline):
    data = pipeline["data"]
    samples = load_dataset(data)
    assert len(samples) == 24
    manifest = json.loads((data / "manifest.json").read_text())
    assert manifest["command"] == "gen-data"
    assert manifest["seed"] == 3
    assert manifest["config"]["person_count"] == 8
    assert manifest["config_hash"]
    assert "annotations.json" in manifest["outputs"]


def test_train_outputs(pipeline):
    base = pipeline["base"]
    params = ModelParams.load(base / "params.npz")
    assert params.flag == "baseline"
    assert params.config.backbone_channels == (8, 16, 16)
    log_rows = [
        json.loads(line)
        for line in (base / "training_log.jsonl").read_text().splitlines()
    ]
    assert len(log_rows) == 2
    assert {"epoch", "train_loss", "holdout_loss"} <= set(log_rows[0])
    manifest = json.loads((base / "manifest.json").read_text())
    assert manifest["command"] == "train"
    assert "params.npz" in manifest["outputs"]


def test_finetune_preserves_backbone(pipeline):
    baseline = ModelParams.load(pipeline["base"] / "params.npz")
    enhanced = ModelParams.load(pipeline["enh"] / "params.npz")
    assert enhanced.flag == "enhanced"
    for key, value in baseline.arrays.items():
        if key.startswith("backbone."):
            assert np.array_equal(enhanced.arrays[key], value), key


def test_eval_outputs(pipeline):
    ev = pipeline["eval"]
    for c in ALL_CONDITIONS:
        assert (ev / f"roc_{c.value}.csv").exists()
    for c in LOCALIZED_CONDITIONS:
        assert (ev / f"froc_{c.value}.csv").exists()
    metrics = json.loads((ev / "metrics.json").read_text())
    assert set(metrics["auc"]) == {c.value for c in ALL_CONDITIONS}
    assert 0.0 <= metrics["mean_auc"] <= 1.0
    assert metrics["config_hash"]
    assert (ev / "curves.png").stat().st_size > 1000
    first_line = (ev / f"roc_caries.csv").read_text().splitlines()[0]
    assert first_line.startswith("# config_hash=")


def test_calibrate_outputs(pipeline):
    cal = pipeline["cal"]
    payload = json.loads((cal / "operating_points.json").read_text())
    assert payload["config_hash"]
    table = OperatingPointTable.from_json(
        (cal / "operating_points.json").read_text()
    )
    for c in ALL_CONDITIONS:
        t1, t2 = table.pair(c)
        assert t2 <= t1


def test_infer_outputs(pipeline):
    inf = pipeline["infer"]
    levels = json.loads((inf / "levels.json").read_text())
    assert set(levels["levels"]) == {c.value for c in ALL_CONDITIONS}
    for entry in levels["levels"].values():
        assert entry["level"] in ("unlikely", "likely", "very_likely")
        assert 0.0 <= entry["score"] <= 1.0
    assert (inf / "boxes_overlay.png").exists()


def test_missing_dataset_error_is_machine_parsable(tmp_path):
    result = RUNNER.invoke(
        main,
        [
            "eval",
            "--data", str(tmp_path / "nothing"),
            "--params", str(tmp_path / "nothing.npz"),
            "--out", str(tmp_path / "out"),
        ],
    )
    assert result.exit_code == 1
    payload = json.loads(result.stderr.strip().splitlines()[-1])
    assert payload["error"] == "missing-artifact"
    assert "gen-data" in payload["detail"]


def test_missing_params_error_names_producer(pipeline, tmp_path):
    result = RUNNER.invoke(
        main,
        [
            "eval",
            "--data", str(pipeline["data"]),
            "--params", str(tmp_path / "absent.npz"),
            "--out", str(tmp_path / "out"),
        ],
    )
    assert result.exit_code == 1
    payload = json.loads(result.stderr.strip().splitlines()[-1])
    assert payload["error"] == "missing-artifact"
    assert "train" in payload["detail"]


def test_invalid_config_error_category(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("model:\n  input_size: 62\n  backbone_channels: [8, 16, 16]\n")
    data = tmp_path / "d"
    _run("gen-data", "--out", str(data), "--seed", "1", "--config", str(cfg))
    result = RUNNER.invoke(
        main,
        [
            "train",
            "--data", str(data),
            "--out", str(tmp_path / "o"),
            "--config", str(cfg),
        ],
    )
    assert result.exit_code == 1
    payload = json.loads(result.stderr.strip().splitlines()[-1])
    assert payload["error"] == "config"
    assert "input_size" in payload["detail"]


def test_low_signal_preset(tmp_path):
    out = tmp_path / "weak"
    _run(
        "gen-data",
        "--out", str(out),
        "--seed", "2",
        "--preset", "low-signal",
        "--config", str(_tiny_cfg(tmp_path)),
    )
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["noise"] > 0.02
    assert manifest["config"]["person_count"] == 4  # explicit config overrides preset


def _tiny_cfg(tmp_path):
    cfg = tmp_path / "tiny.yaml"
    cfg.write_text("dataset:\n  person_count: 4\n  images_per_person: 2\n")
    return cfg
