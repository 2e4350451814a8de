# 06_service_session.py
# Full self-exam over real HTTP: create a session, answer the questionnaire,
# upload a photo with the capture guide, draw a symptom stroke, analyze, and
# read the report back. Uses the model and thresholds cached by the earlier
# walkthroughs (trains them on the spot if missing).

import io
import json
import threading
import time
from pathlib import Path

import httpx
import numpy as np
import uvicorn
from PIL import Image

from _common import OUT, ensure_table, ensure_trained

from oralscreen.model import sample_truth
from oralscreen.core import ALL_CONDITIONS
from oralscreen.service import ExamService, create_app

params, _, test_side = ensure_trained()
table = ensure_table(params, test_side)
store = OUT / "service_store"
app = create_app(ExamService(store_dir=store, baseline=params, table=table))

config = uvicorn.Config(app, host="127.0.0.1", port=8731, log_level="warning")
server = uvicorn.Server(config)
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.05)
base = "http://127.0.0.1:8731"
print(f"service up at {base}, store {store}")

# A test-side image with at least one planted box makes an interesting exam.
sample = next(s for s in test_side if s.boxes)
buf = io.BytesIO()
Image.fromarray((sample.image.pixels * 255).round().astype(np.uint8)).save(
    buf, format="PNG"
)

with httpx.Client(base_url=base, timeout=30.0) as client:
    sid = client.post("/sessions").json()["session_id"]
    print(f"session {sid}")

    schema = client.get("/questionnaire").json()
    answers = {q["id"]: 0 for q in schema["questions"]}
    client.put(f"/sessions/{sid}/questionnaire", json={"answers": answers})
    print(f"answered {len(answers)} questions")

    # The guide's solid box is the crop; full frame keeps the image as-is.
    guide = json.dumps({"dashed": [0, 0, 1, 1], "solid": [0, 0, 1, 1]})
    r = client.post(
        f"/sessions/{sid}/images",
        files={"file": ("exam.png", buf.getvalue(), "image/png")},
        data={"guide": guide},
    )
    image_id = r.json()["image_id"]

    r = client.post(
        f"/sessions/{sid}/images/{image_id}/annotations",
        json={"strokes": [{"channel": "pain", "points": [[0.3, 0.5], [0.6, 0.5]]}]},
    )
    print(f"pain stroke covers {r.json()['pain_pixels']} pixels")

    report = client.post(f"/sessions/{sid}/analyze").json()
    print(f"\nreport (model: {report['model_flag']}):")
    for f in report["images"][0]["findings"]:
        line = f"  {f['condition']:<20} {f['level']:<12} score {f['score']:.3f}"
        if f["boxes"]:
            line += f", {len(f['boxes'])} box(es)"
        if f["heatmap_ref"]:
            line += ", heatmap attached"
        print(line)
    flagged = [f for f in report["images"][0]["findings"] if f["level"] != "unlikely"]
    if flagged:
        print(f"\nsuggestions for {flagged[0]['condition']}:")
        for s in flagged[0]["suggestions"]:
            print(f"  - {s}")

    truth = [c.value for c in ALL_CONDITIONS if sample_truth(sample, c) == 1.0]
    print(f"\nactually planted: {', '.join(truth) or 'nothing'}")

server.should_exit = True
thread.join(timeout=5)
print("\nthe session directory persists; restarting the service serves the")
print("same report bytes (the API tests pin that down)")
