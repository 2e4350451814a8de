// @vitest-environment jsdom

import { beforeEach, describe, expect, it, vi } from "vitest";

import { cornerStyle } from "../src/overlay";
import type { Guide } from "../src/types";
import { DEFAULT_GUIDE, drawCropPreview, renderCapture } from "../src/views/capture";

// jsdom has no blob URL support; the view only needs a string back
(URL as unknown as { createObjectURL: unknown }).createObjectURL = vi.fn(() => "blob:fixture");

function render(guide: Guide = DEFAULT_GUIDE) {
  const host = document.createElement("div");
  document.body.appendChild(host);
  const onUpload = vi.fn();
  renderCapture(host, guide, { onUpload });
  return { host, onUpload };
}

function pickFile(host: HTMLElement, file: File): void {
  const picker = host.querySelector<HTMLInputElement>("input[type=file]")!;
  Object.defineProperty(picker, "files", { value: [file] });
  picker.dispatchEvent(new Event("change", { bubbles: true }));
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("capture view", () => {
  it("positions both guides from the guide fractions", () => {
    const { host } = render();
    const dashed = host.querySelector<HTMLElement>(".guide-dashed")!;
    const solid = host.querySelector<HTMLElement>(".guide-solid")!;
    const wantDashed = cornerStyle(DEFAULT_GUIDE.dashed);
    const wantSolid = cornerStyle(DEFAULT_GUIDE.solid);
    // jsdom re-serializes "5.000%" as "5%", so compare the numbers
    const pct = (v: string) => parseFloat(v);
    expect(pct(dashed.style.left)).toBeCloseTo(pct(wantDashed.left), 3);
    expect(pct(dashed.style.width)).toBeCloseTo(pct(wantDashed.width), 3);
    expect(pct(solid.style.left)).toBeCloseTo(pct(wantSolid.left), 3);
    expect(pct(solid.style.top)).toBeCloseTo(pct(wantSolid.top), 3);
    expect(pct(solid.style.height)).toBeCloseTo(pct(wantSolid.height), 3);
  });

  it("keeps the file picker as the fallback when no camera exists", () => {
    const { host } = render();
    expect(host.querySelector("input[type=file]")).not.toBeNull();
    expect(host.querySelector<HTMLButtonElement>("button.shoot")!.hidden).toBe(true);
  });

  it("stages a chosen file and uploads it with the active guide", () => {
    const { host, onUpload } = render();
    const file = new File(["not-really-a-png"], "mouth.png", { type: "image/png" });
    pickFile(host, file);

    const preview = host.querySelector<HTMLElement>(".preview")!;
    expect(preview.hidden).toBe(false);
    expect(host.querySelector<HTMLImageElement>("img.still")!.hidden).toBe(false);

    host.querySelector<HTMLButtonElement>("button.upload")!.click();
    expect(onUpload).toHaveBeenCalledOnce();
    expect(onUpload).toHaveBeenCalledWith(file, "mouth.png", DEFAULT_GUIDE);
  });

  it("does not upload before anything is staged", () => {
    const { host, onUpload } = render();
    host.querySelector<HTMLButtonElement>("button.upload")!.click();
    expect(onUpload).not.toHaveBeenCalled();
  });

  it("sizes the crop preview to the solid box's aspect ratio", () => {
    // jsdom logs a loud "not implemented" for canvas 2d contexts
    vi.spyOn(console, "error").mockImplementation(() => {});
    const img = document.createElement("img");
    Object.defineProperty(img, "naturalWidth", { value: 400 });
    Object.defineProperty(img, "naturalHeight", { value: 300 });
    const canvas = document.createElement("canvas");
    drawCropPreview(img, DEFAULT_GUIDE, canvas);
    // solid box is 70% x 70%: source crop 280x210, scaled to 256 wide
    expect(canvas.width).toBe(256);
    expect(canvas.height).toBe(192);
  });
});
