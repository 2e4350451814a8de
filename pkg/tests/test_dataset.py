"""Synthetic data generation, augmentation, splitting, and the disk format."""

import json

import numpy as np
import pytest

from oralscreen.core import (
    ALL_CONDITIONS,
    IMAGE_LEVEL_CONDITIONS,
    LOCALIZED_CONDITIONS,
    Condition,
    TaskForm,
)
from oralscreen.dataset import (
    FIELD_REGIONS,
    IDENTITY_AUGMENT,
    SyntheticConfig,
    augment,
    generate,
    load_dataset,
    low_signal_config,
    region_mask,
    save_dataset,
    spatial_transform,
    split,
)
from oralscreen.errors import ConfigError, DatasetFormatError, SplitError
from oralscreen.model import sample_truth


def test_generate_is_deterministic(tiny_samples):
    again = generate(SyntheticConfig(person_count=6, images_per_person=3), seed=5)
    assert len(again) == len(tiny_samples) == 18
    for a, b in zip(tiny_samples, again):
        assert np.array_equal(a.image.pixels, b.image.pixels)
        assert a.boxes == b.boxes
        assert a.labels == b.labels
        assert a.planted == b.planted
        if a.priors is None:
            assert b.priors is None
        else:
            assert a.priors.answers == b.priors.answers
            assert np.array_equal(a.priors.symptom_mask, b.priors.symptom_mask)


def test_generate_seed_changes_content():
    a = generate(SyntheticConfig(person_count=2, images_per_person=2), seed=1)
    b = generate(SyntheticConfig(person_count=2, images_per_person=2), seed=2)
    assert any(
        not np.array_equal(x.image.pixels, y.image.pixels) for x, y in zip(a, b)
    )


def test_planted_centroids_fall_inside_boxes():
    samples = generate(SyntheticConfig(person_count=20, images_per_person=5), seed=9)
    checked = 0
    for s in samples:
        localized = [p for p in s.planted if p.condition.task_form is TaskForm.LOCALIZED]
        for pat in localized:
            hits = [
                b
                for b in s.boxes
                if b.condition is pat.condition and b.contains_point(pat.cx, pat.cy)
            ]
            assert hits, f"{s.source_id}: no box contains planted {pat.condition.value}"
            checked += 1
    assert checked > 50


def test_labels_match_planted_patterns():
    samples = generate(SyntheticConfig(person_count=10, images_per_person=4), seed=13)
    for s in samples:
        planted_conditions = {p.condition for p in s.planted}
        for c in LOCALIZED_CONDITIONS:
            has_box = any(b.condition is c for b in s.boxes)
            assert has_box == (c in planted_conditions)
            assert sample_truth(s, c) == (1.0 if has_box else 0.0)
        for c in IMAGE_LEVEL_CONDITIONS:
            assert sample_truth(s, c) == (1.0 if c in planted_conditions else 0.0)
        for p in s.planted:
            if p.condition.task_form is TaskForm.IMAGE_LEVEL:
                assert p.region in FIELD_REGIONS


def test_prevalence_controls_positive_rate():
    cfg = SyntheticConfig(
        person_count=40,
        images_per_person=10,
        prevalence={c: (0.9 if c is Condition.CARIES else 0.1) for c in ALL_CONDITIONS},
    )
    samples = generate(cfg, seed=3)
    rate = np.mean([sample_truth(s, Condition.CARIES) for s in samples])
    assert rate > 0.8
    rate_low = np.mean([sample_truth(s, Condition.SOFT_DEPOSIT) for s in samples])
    assert rate_low < 0.2


def test_region_masks_partition_halves():
    left = region_mask("left", 10, 10)
    right = region_mask("right", 10, 10)
    assert left.sum() == right.sum() == 50
    assert not (left & right).any()
    assert (left | right).all()
    with pytest.raises(ConfigError):
        region_mask("diagonal", 10, 10)


def test_prior_coverage_and_informativeness():
    full = generate(
        SyntheticConfig(person_count=8, images_per_person=4, prior_coverage=1.0),
        seed=7,
    )
    assert all(s.priors is not None for s in full)
    none = generate(
        SyntheticConfig(person_count=8, images_per_person=4, prior_coverage=0.0),
        seed=7,
    )
    assert all(s.priors is None for s in none)
    # Fully informative: the first five answers reveal the five conditions.
    informative = generate(
        SyntheticConfig(
            person_count=12, images_per_person=5, prior_informativeness=1.0
        ),
        seed=15,
    )
    for s in informative:
        for qi, c in enumerate(ALL_CONDITIONS):
            expected = 0 if sample_truth(s, c) == 0.0 else None
            if expected == 0:
                assert s.priors.answers[qi] == 0
            else:
                assert s.priors.answers[qi] == s.priors.choice_counts[qi] - 1


def test_identity_augment_is_exact():
    sample = generate(SyntheticConfig(person_count=2, images_per_person=1), seed=4)[0]
    out = augment(sample, seed=123, config=IDENTITY_AUGMENT)
    assert np.array_equal(out.image.pixels, sample.image.pixels)
    assert out.boxes == sample.boxes
    assert out.labels == sample.labels


def test_augment_deterministic_in_seed():
    sample = generate(SyntheticConfig(person_count=2, images_per_person=1), seed=4)[0]
    a = augment(sample, seed=99)
    b = augment(sample, seed=99)
    c = augment(sample, seed=100)
    assert np.array_equal(a.image.pixels, b.image.pixels)
    assert a.boxes == b.boxes
    assert not np.array_equal(a.image.pixels, c.image.pixels)


def test_integer_pixel_shift_oracle():
    # dx of 8/64 moves content exactly 8 pixels right; interpolation weights
    # are then 0/1 and the interior must match the original exactly.
    samples = generate(
        SyntheticConfig(person_count=3, images_per_person=2, noise=0.0), seed=21
    )
    sample = samples[0]
    shifted = spatial_transform(sample, dx=0.125)
    w = sample.image.width
    px = int(0.125 * w)
    assert np.allclose(
        shifted.image.pixels[:, px:, :], sample.image.pixels[:, :-px, :], atol=1e-6
    )
    for b0 in sample.boxes:
        moved = [b for b in shifted.boxes if b.condition is b0.condition]
        if b0.cx + 0.125 < 1.0:
            assert any(abs(b.cx - (b0.cx + 0.125)) < 1e-9 for b in moved)


def test_shift_moves_symptom_mask():
    cfg = SyntheticConfig(person_count=4, images_per_person=3, prior_coverage=1.0)
    samples = [s for s in generate(cfg, seed=2) if s.priors.symptom_mask.any()]
    assert samples, "need at least one nonzero mask"
    s = samples[0]
    shifted = spatial_transform(s, dx=0.25)
    px = int(0.25 * s.image.width)
    assert np.array_equal(
        shifted.priors.symptom_mask[:, px:, :], s.priors.symptom_mask[:, :-px, :]
    )


def test_box_dropped_when_center_exits():
    samples = generate(SyntheticConfig(person_count=6, images_per_person=3), seed=8)
    boxed = [s for s in samples if s.boxes]
    s = boxed[0]
    target = s.boxes[0]
    # Shift far enough that this box's center crosses the right edge.
    dx = 1.0 - target.cx + 0.01
    shifted = spatial_transform(s, dx=min(dx, 0.99))
    for b in shifted.boxes:
        assert 0.0 <= b.cx <= 1.0 and 0.0 <= b.cy <= 1.0


def test_split_is_person_disjoint_across_seeds(tiny_samples):
    for seed in range(50):
        train, test = split(tiny_samples, 2.0 / 3.0, seed=seed)
        assert len(train) + len(test) == len(tiny_samples)
        train_persons = {s.person_id for s in train}
        test_persons = {s.person_id for s in test}
        assert not train_persons & test_persons
        assert len(train) >= len(test)


def test_split_edge_cases(tiny_samples):
    train, test = split(tiny_samples, 1.0, seed=0)
    assert len(test) == 0
    train, test = split(tiny_samples, 0.0, seed=0)
    assert len(train) == 0
    single = [s for s in tiny_samples if s.person_id == tiny_samples[0].person_id]
    with pytest.raises(SplitError):
        split(single, 0.5, seed=0)
    with pytest.raises(ConfigError):
        split(tiny_samples, 1.5, seed=0)


def test_dataset_round_trip(tmp_path, tiny_samples):
    root = tmp_path / "ds"
    save_dataset(tiny_samples, root)
    loaded = load_dataset(root)
    assert len(loaded) == len(tiny_samples)
    for a, b in zip(tiny_samples, loaded):
        assert a.source_id == b.source_id
        assert a.person_id == b.person_id
        # pixels are pre-quantized to k/255, so the PNG trip is lossless
        assert np.allclose(a.image.pixels, b.image.pixels, atol=1e-6)
        assert a.boxes == b.boxes
        assert a.labels == b.labels
        assert a.planted == b.planted
        if a.priors is None:
            assert b.priors is None
        else:
            assert a.priors.answers == b.priors.answers
            assert a.priors.choice_counts == b.priors.choice_counts
            assert np.array_equal(a.priors.symptom_mask, b.priors.symptom_mask)


def _write_dataset(tmp_path, mutate):
    samples = generate(SyntheticConfig(person_count=2, images_per_person=1), seed=1)
    root = tmp_path / "ds"
    save_dataset(samples, root)
    ann = root / "annotations.json"
    payload = json.loads(ann.read_text())
    mutate(payload)
    ann.write_text(json.dumps(payload))
    return root


def test_load_rejects_nonbinary_label(tmp_path):
    root = _write_dataset(
        tmp_path, lambda p: p["samples"][0]["labels"].update(soft_deposit=1.7)
    )
    with pytest.raises(DatasetFormatError, match="soft_deposit"):
        load_dataset(root)


def test_load_rejects_missing_label_field(tmp_path):
    root = _write_dataset(
        tmp_path, lambda p: p["samples"][0]["labels"].pop("discoloration")
    )
    with pytest.raises(DatasetFormatError, match="discoloration"):
        load_dataset(root)


def test_load_rejects_bad_schema_version(tmp_path):
    root = _write_dataset(tmp_path, lambda p: p.update(schema_version=99))
    with pytest.raises(DatasetFormatError, match="schema_version"):
        load_dataset(root)


def test_load_rejects_box_for_image_level_condition(tmp_path):
    def mutate(p):
        p["samples"][0]["boxes"] = [
            {
                "condition": "soft_deposit",
                "cx": 0.5,
                "cy": 0.5,
                "w": 0.1,
                "h": 0.1,
                "confidence": 1.0,
            }
        ]

    root = _write_dataset(tmp_path, mutate)
    with pytest.raises(DatasetFormatError, match="soft_deposit"):
        load_dataset(root)


def test_load_missing_annotations(tmp_path):
    with pytest.raises(DatasetFormatError, match="annotations.json"):
        load_dataset(tmp_path / "empty")


def test_low_signal_config_is_harder():
    easy = SyntheticConfig()
    hard = low_signal_config()
    assert hard.noise > easy.noise
    assert hard.pattern_alpha < easy.pattern_alpha
    assert hard.tint_strength < easy.tint_strength
    assert low_signal_config(0.25).prior_informativeness == 0.25
