# 04_explainability.py
# The diffuse conditions (soft deposit, discoloration) carry no boxes, so the
# report shows a relevance heatmap instead. This walkthrough renders a few and
# checks that the hottest pixel actually lands in the planted region.

from pathlib import Path

import numpy as np
from PIL import Image

from _common import ensure_trained

from oralscreen.core import IMAGE_LEVEL_CONDITIONS
from oralscreen.dataset import region_mask
from oralscreen.explain import grad_cam, pointing_game, save_heatmap
from oralscreen.model import sample_truth

OUT = Path(__file__).resolve().parent / "out"
params, _, test_side = ensure_trained()
size = params.config.input_size

for condition in IMAGE_LEVEL_CONDITIONS:
    positives = [s for s in test_side if sample_truth(s, condition) == 1.0]
    hits = 0
    for s in positives:
        planted = next(p for p in s.planted if p.condition is condition)
        heatmap = grad_cam(params, s.image, condition)
        hits += pointing_game(heatmap, region_mask(planted.region, size, size))
    print(f"{condition.value}: peak inside planted region for "
          f"{hits}/{len(positives)} positives")

    # Save one side-by-side (input | heatmap | overlay) for eyeballing.
    s = positives[0]
    heatmap = grad_cam(params, s.image, condition)
    save_heatmap(heatmap, OUT / f"heatmap_{condition.value}.png")
    gray = np.stack([heatmap.values] * 3, axis=-1)
    overlay = 0.5 * s.image.pixels + 0.5 * np.stack(
        [heatmap.values, np.zeros_like(heatmap.values), np.zeros_like(heatmap.values)],
        axis=-1,
    )
    strip = np.concatenate([s.image.pixels, gray, overlay], axis=1)
    Image.fromarray((np.clip(strip, 0, 1) * 255).astype(np.uint8)).resize(
        (size * 3 * 3, size * 3), Image.NEAREST
    ).save(OUT / f"cam_strip_{condition.value}.png")
    print(f"  wrote cam_strip_{condition.value}.png "
          f"(planted region: {next(p.region for p in s.planted if p.condition is condition)})")
