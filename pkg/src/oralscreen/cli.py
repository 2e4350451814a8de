"""Operator command line for the full pipeline.

Every subcommand writes a manifest (inputs, seed, resolved config, config
hash, outputs) next to its outputs so a run can be reproduced exactly, and
every artifact carries the producing run's config hash. Failures exit
nonzero with a single machine-parsable JSON line on stderr.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import sys
import time
from pathlib import Path

import click
import numpy as np
from PIL import Image
from PIL.PngImagePlugin import PngInfo

from . import config as config_mod
from .core import (
    ALL_CONDITIONS,
    DEFAULT_GUIDE,
    Condition,
    FracRect,
    GuideGeometry,
    OperatingPointTable,
    OralImage,
    TaskForm,
    crop_to_guide,
    image_score_from_boxes,
    level_for_score,
)
from .dataset import (
    SyntheticConfig,
    generate,
    load_dataset,
    low_signal_config,
    save_dataset,
    split,
)
from .errors import MissingArtifactError, OralScreenError
from .evaluate import (
    CalibrationPolicy,
    calibrate_table,
    froc,
    metric_summary,
    plot_curves,
    read_curve_csv,
    roc,
    select_operating_points,
    write_curve_csv,
    write_metric_summary,
)
from .explain import grad_cam, save_heatmap
from .model import (
    ModelConfig,
    ModelParams,
    TrainConfig,
    dataset_scores,
    decode_boxes,
    fine_tune_enhanced,
    forward,
    sample_truth,
    train as train_model,
)

MANIFEST_SCHEMA_VERSION = 1

#: Shared split convention so train and eval agree on the held-out persons.
DEFAULT_TRAIN_FRACTION = 5 / 7
DEFAULT_SPLIT_SEED = 0


def _die(exc: Exception) -> None:
    category = getattr(exc, "category", "error")
    sys.stderr.write(json.dumps({"error": category, "detail": str(exc)}) + "\n")
    sys.exit(1)


def _cli_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except OralScreenError as exc:
            _die(exc)
        except FileNotFoundError as exc:
            _die(exc)

    return wrapper


def _load_section(config_path: str | None, section: str) -> dict:
    if not config_path:
        return {}
    payload = config_mod.load_yaml_config(config_path)
    value = payload.get(section, {})
    if not isinstance(value, dict):
        raise click.UsageError(f"config section {section!r} must be a mapping")
    return value


def _write_manifest(
    out_dir: Path,
    command: str,
    cfg: dict,
    seed: int | None,
    inputs: dict,
    outputs: list[str],
) -> str:
    run_hash = config_mod.config_hash({"command": command, "config": cfg, "seed": seed})
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "command": command,
        "seed": seed,
        "config": cfg,
        "config_hash": run_hash,
        "inputs": inputs,
        "outputs": outputs,
        "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)
    return run_hash


def _require(path: Path, what: str, producer: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(
            f"{what} not found at {path}; produce it with the {producer} subcommand"
        )
    return path


def _dataclass_kwargs(cls, raw: dict) -> dict:
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - names
    if unknown:
        raise click.UsageError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return raw


def _synthetic_config(raw: dict) -> SyntheticConfig:
    raw = dict(raw)
    prevalence = raw.pop("prevalence", None)
    kwargs = _dataclass_kwargs(SyntheticConfig, raw)
    for key in ("pattern_size", "speckle_count"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    if prevalence is not None:
        kwargs["prevalence"] = {Condition(k): float(v) for k, v in prevalence.items()}
    return SyntheticConfig(**kwargs)


@click.group()
def main() -> None:
    """Oral-condition screening pipeline."""


@main.command("gen-data")
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=11, show_default=True, type=int)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option(
    "--preset",
    type=click.Choice(["default", "low-signal"]),
    default="default",
    show_default=True,
    help="low-signal weakens visual evidence for prior-fusion studies.",
)
@_cli_errors
def gen_data(out: Path, seed: int, config_path: str | None, preset: str) -> None:
    """Generate a synthetic dataset directory."""
    section = _load_section(config_path, "dataset")
    if preset == "low-signal":
        base = dataclasses.asdict(low_signal_config())
        base.update(section)
        section = base
    cfg = _synthetic_config(section)
    samples = generate(cfg, seed=seed)
    save_dataset(samples, out)
    cfg_dict = dataclasses.asdict(cfg)
    cfg_dict["prevalence"] = {c.value: v for c, v in cfg.prevalence.items()}
    _write_manifest(
        out,
        "gen-data",
        cfg_dict,
        seed,
        inputs={},
        outputs=["annotations.json", "images/", "masks/"],
    )
    click.echo(f"wrote {len(samples)} samples to {out}")


def _split_options(fn):
    fn = click.option(
        "--train-fraction",
        default=DEFAULT_TRAIN_FRACTION,
        show_default=True,
        type=float,
    )(fn)
    fn = click.option(
        "--split-seed", default=DEFAULT_SPLIT_SEED, show_default=True, type=int
    )(fn)
    return fn


def _model_and_train(config_path: str | None, seed: int) -> tuple[ModelConfig, TrainConfig]:
    model_cfg = ModelConfig(**_dataclass_kwargs(ModelConfig, _load_section(config_path, "model")))
    raw = _load_section(config_path, "train")
    raw.setdefault("seed", seed)
    train_cfg = TrainConfig(**_dataclass_kwargs(TrainConfig, raw))
    return model_cfg, train_cfg


@main.command()
@click.option("--data", required=True, type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--holdout-fraction", default=0.2, show_default=True, type=float)
@_split_options
@_cli_errors
def train(
    data: Path,
    out: Path,
    seed: int,
    config_path: str | None,
    holdout_fraction: float,
    train_fraction: float,
    split_seed: int,
) -> None:
    """Train a baseline model on the train side of the person split."""
    _require(data / "annotations.json", "dataset", "gen-data")
    samples = load_dataset(data)
    train_side, _ = split(samples, train_fraction, seed=split_seed)
    fit_set, holdout = split(train_side, 1.0 - holdout_fraction, seed=split_seed + 1)
    model_cfg, train_cfg = _model_and_train(config_path, seed)
    params, history = train_model(
        model_cfg, train_cfg, fit_set, holdout, log_path=out / "training_log.jsonl"
    )
    out.mkdir(parents=True, exist_ok=True)
    params.save(out / "params.npz")
    cfg = {
        "model": model_cfg.to_dict(),
        "train": dataclasses.asdict(train_cfg),
        "train_fraction": train_fraction,
        "split_seed": split_seed,
        "holdout_fraction": holdout_fraction,
    }
    _write_manifest(
        out,
        "train",
        cfg,
        seed,
        inputs={"data": str(data)},
        outputs=["params.npz", "training_log.jsonl"],
    )
    click.echo(
        f"trained {len(history)} epochs; best holdout loss "
        f"{min(h['holdout_loss'] for h in history):.4f}; params at {out/'params.npz'}"
    )


@main.command()
@click.option("--data", required=True, type=click.Path(path_type=Path))
@click.option("--baseline", required=True, type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=1, show_default=True, type=int)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--holdout-fraction", default=0.2, show_default=True, type=float)
@_split_options
@_cli_errors
def finetune(
    data: Path,
    baseline: Path,
    out: Path,
    seed: int,
    config_path: str | None,
    holdout_fraction: float,
    train_fraction: float,
    split_seed: int,
) -> None:
    """Fine-tune prior-fusion heads from a trained baseline checkpoint."""
    _require(data / "annotations.json", "dataset", "gen-data")
    _require(baseline, "baseline checkpoint", "train")
    samples = load_dataset(data)
    train_side, _ = split(samples, train_fraction, seed=split_seed)
    fit_set, holdout = split(train_side, 1.0 - holdout_fraction, seed=split_seed + 1)
    base_params = ModelParams.load(baseline)
    _, train_cfg = _model_and_train(config_path, seed)
    params, history = fine_tune_enhanced(
        base_params, train_cfg, fit_set, holdout, log_path=out / "training_log.jsonl"
    )
    out.mkdir(parents=True, exist_ok=True)
    params.save(out / "params.npz")
    cfg = {
        "train": dataclasses.asdict(train_cfg),
        "train_fraction": train_fraction,
        "split_seed": split_seed,
        "holdout_fraction": holdout_fraction,
    }
    _write_manifest(
        out,
        "finetune",
        cfg,
        seed,
        inputs={"data": str(data), "baseline": str(baseline)},
        outputs=["params.npz", "training_log.jsonl"],
    )
    click.echo(f"enhanced params at {out/'params.npz'}")


@main.command("eval")
@click.option("--data", required=True, type=click.Path(path_type=Path))
@click.option("--params", "params_path", required=True, type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--use-priors/--no-priors", default=False, show_default=True)
@click.option(
    "--subset",
    type=click.Choice(["test", "train", "all"]),
    default="test",
    show_default=True,
)
@click.option("--conf-floor", default=0.05, show_default=True, type=float)
@click.option("--nms-iou", default=0.45, show_default=True, type=float)
@_split_options
@_cli_errors
def eval_cmd(
    data: Path,
    params_path: Path,
    out: Path,
    use_priors: bool,
    subset: str,
    conf_floor: float,
    nms_iou: float,
    train_fraction: float,
    split_seed: int,
) -> None:
    """ROC per condition, FROC per box-form condition, metric summary."""
    _require(data / "annotations.json", "dataset", "gen-data")
    _require(params_path, "model checkpoint", "train")
    samples = load_dataset(data)
    if subset != "all":
        train_side, test_side = split(samples, train_fraction, seed=split_seed)
        samples = test_side if subset == "test" else train_side
    params = ModelParams.load(params_path)
    cfg = {
        "subset": subset,
        "train_fraction": train_fraction,
        "split_seed": split_seed,
        "use_priors": use_priors,
        "conf_floor": conf_floor,
        "nms_iou": nms_iou,
        "params_flag": params.flag,
    }
    outputs: list[str] = []
    run_hash = _write_manifest(
        out, "eval", cfg, None, inputs={"data": str(data), "params": str(params_path)}, outputs=outputs
    )
    scores, labels = dataset_scores(params, samples, use_priors=use_priors)
    roc_curves = {}
    aucs = {}
    for c in ALL_CONDITIONS:
        curve = roc(list(zip(scores[c], labels[c].astype(int))))
        roc_curves[c] = curve
        aucs[c] = curve.auc
        name = f"roc_{c.value}.csv"
        write_curve_csv(curve, out / name, config_hash=run_hash)
        outputs.append(name)
    froc_curves = {}
    for c in (c for c in ALL_CONDITIONS if c.task_form is TaskForm.LOCALIZED):
        per_image = []
        for s in samples:
            raw = forward(params, s.image, s.priors if use_priors else None)
            preds = [
                b
                for b in decode_boxes(raw, conf_floor=conf_floor, nms_iou=nms_iou)
                if b.condition is c
            ]
            truths = [b for b in s.boxes if b.condition is c]
            per_image.append((preds, truths))
        curve = froc(per_image)
        froc_curves[c] = curve
        name = f"froc_{c.value}.csv"
        write_curve_csv(curve, out / name, config_hash=run_hash)
        outputs.append(name)
    summary = metric_summary(aucs, froc_curves, config_hash=run_hash)
    write_metric_summary(summary, out / "metrics.json")
    plot_curves(roc_curves, froc_curves, out / "curves.png", config_hash=run_hash)
    outputs.extend(["metrics.json", "curves.png"])
    _write_manifest(
        out, "eval", cfg, None, inputs={"data": str(data), "params": str(params_path)}, outputs=outputs
    )
    click.echo(json.dumps(summary["auc"], indent=1))
    click.echo(f"mean AUC {summary['mean_auc']:.4f}; outputs in {out}")


@main.command()
@click.option("--eval-dir", required=True, type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--fp-budget", default=0.1, show_default=True, type=float)
@click.option("--sensitivity-floor", default=0.9, show_default=True, type=float)
@_cli_errors
def calibrate(
    eval_dir: Path, out: Path, fp_budget: float, sensitivity_floor: float
) -> None:
    """Turn eval ROC curves into an operating-point table."""
    curves = {}
    for c in ALL_CONDITIONS:
        path = _require(eval_dir / f"roc_{c.value}.csv", "ROC curve", "eval")
        curves[c] = read_curve_csv(path)
    policy = CalibrationPolicy(fp_budget=fp_budget, sensitivity_floor=sensitivity_floor)
    table, choices = calibrate_table(curves, policy)
    cfg = {"fp_budget": fp_budget, "sensitivity_floor": sensitivity_floor}
    run_hash = _write_manifest(
        out.parent if out.suffix else out,
        "calibrate",
        cfg,
        None,
        inputs={"eval_dir": str(eval_dir)},
        outputs=[out.name if out.suffix else "operating_points.json"],
    )
    table_path = out if out.suffix else out / "operating_points.json"
    table_path.parent.mkdir(parents=True, exist_ok=True)
    table_path.write_text(table.to_json(config_hash=run_hash), encoding="utf-8")
    for c, choice in choices.items():
        note = f" ({'; '.join(choice.warnings)})" if choice.warnings else ""
        click.echo(f"{c.value}: t1={choice.t1:.4f} t2={choice.t2:.4f}{note}")
    click.echo(f"table at {table_path}")


def _load_table(path: Path) -> OperatingPointTable:
    _require(path, "operating-point table", "calibrate")
    return OperatingPointTable.from_json(path.read_text(encoding="utf-8"))


def _overlay_boxes(image: OralImage, boxes, path: Path, run_hash: str) -> None:
    from PIL import ImageDraw

    colors = {
        Condition.PERIODONTAL_DISEASE: (230, 60, 120),
        Condition.CARIES: (60, 40, 25),
        Condition.DENTAL_CALCULUS: (235, 200, 40),
    }
    scale = 4
    h, w = image.height * scale, image.width * scale
    im = Image.fromarray(
        np.round(image.pixels * 255.0).astype(np.uint8), mode="RGB"
    ).resize((w, h), Image.NEAREST)
    draw = ImageDraw.Draw(im)
    for b in boxes:
        x0, y0, x1, y1 = b.corners()
        draw.rectangle(
            [x0 * w, y0 * h, x1 * w, y1 * h], outline=colors[b.condition], width=2
        )
    info = PngInfo()
    info.add_text("config_hash", run_hash)
    path.parent.mkdir(parents=True, exist_ok=True)
    im.save(path, format="PNG", pnginfo=info)


@main.command()
@click.option("--params", "params_path", required=True, type=click.Path(path_type=Path))
@click.option("--table", "table_path", required=True, type=click.Path(path_type=Path))
@click.option("--image", "image_path", required=True, type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--guide", default=None, help="JSON with dashed and solid [x0,y0,x1,y1].")
@click.option("--conf-floor", default=0.25, show_default=True, type=float)
@click.option("--nms-iou", default=0.45, show_default=True, type=float)
@_cli_errors
def infer(
    params_path: Path,
    table_path: Path,
    image_path: Path,
    out: Path,
    guide: str | None,
    conf_floor: float,
    nms_iou: float,
) -> None:
    """Analyze one image file; print levels and write overlay artifacts."""
    _require(params_path, "model checkpoint", "train")
    _require(image_path, "input image", "gen-data or your camera")
    table = _load_table(table_path)
    params = ModelParams.load(params_path)
    with Image.open(image_path) as im:
        pixels = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
    src = OralImage(pixels=pixels, source_id=image_path.stem)
    if guide:
        payload = json.loads(guide)
        geom = GuideGeometry(
            dashed_box=FracRect(*payload["dashed"]), solid_box=FracRect(*payload["solid"])
        )
    else:
        geom = DEFAULT_GUIDE
    crop = crop_to_guide(src, geom, out_size=params.config.input_size)
    raw = forward(params, crop)
    decoded = decode_boxes(raw, conf_floor=0.0, nms_iou=nms_iou)
    cfg = {"conf_floor": conf_floor, "nms_iou": nms_iou, "params_flag": params.flag}
    outputs = ["levels.json", "boxes_overlay.png"]
    run_hash = _write_manifest(
        out,
        "infer",
        cfg,
        None,
        inputs={
            "params": str(params_path),
            "table": str(table_path),
            "image": str(image_path),
        },
        outputs=outputs,
    )
    shown = []
    levels = {}
    for c in ALL_CONDITIONS:
        if c.task_form is TaskForm.LOCALIZED:
            mine = [b for b in decoded if b.condition is c]
            score = image_score_from_boxes(mine, c)
            shown.extend(b for b in mine if b.confidence >= max(conf_floor, table.pair(c)[1]))
        else:
            score = raw.condition_score(c)
        level = level_for_score(score, c, table)
        levels[c.value] = {"score": round(score, 6), "level": level.label}
        click.echo(f"{c.value:22s} {level.label:12s} score={score:.4f}")
        if c.task_form is TaskForm.IMAGE_LEVEL and level.value >= 1:
            hm = grad_cam(params, crop, c)
            save_heatmap(hm, out / f"heatmap_{c.value}.png")
            outputs.append(f"heatmap_{c.value}.png")
    _overlay_boxes(crop, shown, out / "boxes_overlay.png", run_hash)
    with open(out / "levels.json", "w", encoding="utf-8") as fh:
        json.dump({"config_hash": run_hash, "levels": levels}, fh, indent=1)
    _write_manifest(
        out,
        "infer",
        cfg,
        None,
        inputs={
            "params": str(params_path),
            "table": str(table_path),
            "image": str(image_path),
        },
        outputs=outputs,
    )


@main.command()
@click.option("--params", "params_path", required=True, type=click.Path(path_type=Path))
@click.option("--enhanced", "enhanced_path", default=None, type=click.Path(path_type=Path))
@click.option("--table", "table_path", required=True, type=click.Path(path_type=Path))
@click.option("--store", required=True, type=click.Path(path_type=Path))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@_cli_errors
def serve(
    params_path: Path,
    enhanced_path: Path | None,
    table_path: Path,
    store: Path,
    host: str,
    port: int,
) -> None:
    """Run the self-exam HTTP service."""
    import uvicorn

    from .service import ExamService, create_app

    _require(params_path, "model checkpoint", "train")
    baseline = ModelParams.load(params_path)
    enhanced = None
    if enhanced_path is not None:
        _require(enhanced_path, "enhanced checkpoint", "finetune")
        enhanced = ModelParams.load(enhanced_path)
    table = _load_table(table_path)
    service = ExamService(store, baseline=baseline, table=table, enhanced=enhanced)
    uvicorn.run(create_app(service), host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
