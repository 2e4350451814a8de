// Step 2: photo capture. A live camera preview when the browser grants one,
// a file picker otherwise. The dashed box is the alignment aid, the solid
// box is what the server will crop to; both are drawn from the same guide
// the upload sends, so what you see is what gets analyzed.

import { cornerStyle } from "../overlay";
import type { Guide } from "../types";

export const DEFAULT_GUIDE: Guide = {
  dashed: [0.05, 0.05, 0.95, 0.95],
  solid: [0.15, 0.15, 0.85, 0.85],
};

export interface CaptureCallbacks {
  onUpload: (file: Blob, filename: string, guide: Guide) => void;
}

function ctx2d(canvas: HTMLCanvasElement): CanvasRenderingContext2D | null {
  try {
    return canvas.getContext("2d");
  } catch {
    return null; // no canvas backend (test DOM); preview is skipped
  }
}

export function renderCapture(
  host: HTMLElement,
  guide: Guide,
  callbacks: CaptureCallbacks,
): void {
  host.innerHTML = `
    <section class="step step-capture">
      <h2>Take a photo</h2>
      <p class="hint">Line your teeth up inside the dashed box. The solid
      box is the part that gets analyzed.</p>
      <div class="stage">
        <video autoplay playsinline muted hidden></video>
        <img class="still" alt="" hidden />
        <div class="guide guide-dashed"></div>
        <div class="guide guide-solid"></div>
      </div>
      <div class="actions">
        <button type="button" class="shoot" hidden>Take photo</button>
        <label class="file-pick">
          or choose a file
          <input type="file" accept="image/*" />
        </label>
      </div>
      <div class="preview" hidden>
        <h3>Crop preview</h3>
        <canvas class="crop"></canvas>
        <button type="button" class="upload">Use this photo</button>
      </div>
    </section>`;

  const dashed = host.querySelector<HTMLElement>(".guide-dashed")!;
  const solid = host.querySelector<HTMLElement>(".guide-solid")!;
  Object.assign(dashed.style, cornerStyle(guide.dashed));
  Object.assign(solid.style, cornerStyle(guide.solid));

  const video = host.querySelector<HTMLVideoElement>("video")!;
  const still = host.querySelector<HTMLImageElement>("img.still")!;
  const shoot = host.querySelector<HTMLButtonElement>("button.shoot")!;
  const picker = host.querySelector<HTMLInputElement>("input[type=file]")!;
  const preview = host.querySelector<HTMLElement>(".preview")!;
  const cropCanvas = host.querySelector<HTMLCanvasElement>("canvas.crop")!;
  const upload = host.querySelector<HTMLButtonElement>("button.upload")!;

  let pending: { blob: Blob; filename: string } | null = null;

  // Camera path; silently falls back to the file picker when unavailable.
  const media = navigator.mediaDevices;
  if (media && typeof media.getUserMedia === "function") {
    media
      .getUserMedia({ video: { facingMode: "user" } })
      .then((stream) => {
        video.srcObject = stream;
        video.hidden = false;
        shoot.hidden = false;
      })
      .catch(() => {
        /* permission denied or no camera: picker stays */
      });
  }

  shoot.addEventListener("click", () => {
    const frame = document.createElement("canvas");
    frame.width = video.videoWidth;
    frame.height = video.videoHeight;
    const ctx = ctx2d(frame);
    if (!ctx) return;
    ctx.drawImage(video, 0, 0);
    frame.toBlob((blob) => {
      if (blob) stage(blob, "camera.png");
    }, "image/png");
  });

  picker.addEventListener("change", () => {
    const file = picker.files?.[0];
    if (file) stage(file, file.name);
  });

  function stage(blob: Blob, filename: string): void {
    pending = { blob, filename };
    const url = URL.createObjectURL(blob);
    still.src = url;
    still.hidden = false;
    video.hidden = true;
    still.onload = () => drawCropPreview(still, guide, cropCanvas);
    preview.hidden = false;
  }

  upload.addEventListener("click", () => {
    if (pending) callbacks.onUpload(pending.blob, pending.filename, guide);
  });
}

/** Paint just the solid-box region, the part the server keeps. */
export function drawCropPreview(
  img: HTMLImageElement,
  guide: Guide,
  canvas: HTMLCanvasElement,
): void {
  const [x0, y0, x1, y1] = guide.solid;
  const sw = (x1 - x0) * img.naturalWidth;
  const sh = (y1 - y0) * img.naturalHeight;
  if (sw <= 0 || sh <= 0) return;
  canvas.width = 256;
  canvas.height = Math.round((256 * sh) / sw);
  const ctx = ctx2d(canvas);
  if (!ctx) return;
  ctx.drawImage(
    img,
    x0 * img.naturalWidth,
    y0 * img.naturalHeight,
    sw,
    sh,
    0,
    0,
    canvas.width,
    canvas.height,
  );
}
