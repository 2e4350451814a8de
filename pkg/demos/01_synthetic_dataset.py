# 01_synthetic_dataset.py
# Generate a small synthetic exam set, look at what got planted where, and
# round-trip it through the on-disk format.

from collections import Counter
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from oralscreen.core import ALL_CONDITIONS, LOCALIZED_CONDITIONS
from oralscreen.dataset import (
    SyntheticConfig,
    generate,
    load_dataset,
    save_dataset,
    split,
)
from oralscreen.model import sample_truth

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(parents=True, exist_ok=True)

cfg = SyntheticConfig(person_count=12, images_per_person=4)
samples = generate(cfg, seed=7)
print(f"generated {len(samples)} images for {cfg.person_count} people")

# Prevalence check: each condition defaults to 50% of images.
counts = Counter()
for s in samples:
    for c in ALL_CONDITIONS:
        counts[c] += int(sample_truth(s, c))
for c in ALL_CONDITIONS:
    print(f"  {c.value:<20} positive in {counts[c]:>2}/{len(samples)}")

s = next(s for s in samples if s.boxes)
print(f"\nsample {s.source_id} (person {s.person_id}):")
for b in s.boxes:
    print(f"  box {b.condition.value} center=({b.cx:.2f},{b.cy:.2f}) "
          f"size=({b.w:.2f}x{b.h:.2f})")
for p in s.planted:
    where = f"region={p.region}" if p.region else f"({p.cx:.2f},{p.cy:.2f})"
    print(f"  planted {p.condition.value} at {where}")

# Contact sheet: first 16 images at 4x zoom with truth boxes drawn on.
zoom, cols = 4, 4
size = cfg.image_size * zoom
sheet = Image.new("RGB", (cols * size, cols * size))
palette = {c: col for c, col in zip(
    LOCALIZED_CONDITIONS, [(255, 70, 70), (80, 160, 255), (255, 220, 60)]
)}
for idx, s in enumerate(samples[:16]):
    tile = Image.fromarray((s.image.pixels * 255).astype(np.uint8)).resize(
        (size, size), Image.NEAREST
    )
    draw = ImageDraw.Draw(tile)
    for b in s.boxes:
        x0, y0, x1, y1 = (v * size for v in b.corners())
        draw.rectangle([x0, y0, x1, y1], outline=palette[b.condition], width=2)
    sheet.paste(tile, ((idx % cols) * size, (idx // cols) * size))
sheet_path = OUT / "contact_sheet.png"
sheet.save(sheet_path)
print(f"\nwrote {sheet_path}")

# People never straddle a split, so person-level looks cannot leak.
train_side, test_side = split(samples, 0.75, seed=1)
train_people = {s.person_id for s in train_side}
test_people = {s.person_id for s in test_side}
print(f"split {len(train_side)}/{len(test_side)}, "
      f"shared people: {len(train_people & test_people)}")

# Storage round trip is lossless (pixels are quantized before save).
ds_dir = OUT / "dataset_demo"
save_dataset(samples, ds_dir)
reloaded = load_dataset(ds_dir)
same = all(
    np.array_equal(a.image.pixels, b.image.pixels) and a.boxes == b.boxes
    for a, b in zip(samples, reloaded)
)
print(f"saved to {ds_dir}, reload identical: {same}")
