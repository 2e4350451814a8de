// Geometry helpers shared by the guide, annotation, and results overlays.
// Everything the server reports is in fractional image coordinates; these
// functions are the only place where fractions meet pixels, which keeps the
// overlays aligned no matter how large the viewport renders the image.

export interface FracBox {
  cx: number;
  cy: number;
  w: number;
  h: number;
}

export interface PixelRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

const clamp01 = (v: number) => Math.min(1, Math.max(0, v));

/** Center-size fractional box -> CSS percentage styles (viewport-free). */
export function boxStyle(box: FracBox): {
  left: string;
  top: string;
  width: string;
  height: string;
} {
  const x0 = clamp01(box.cx - box.w / 2);
  const y0 = clamp01(box.cy - box.h / 2);
  const x1 = clamp01(box.cx + box.w / 2);
  const y1 = clamp01(box.cy + box.h / 2);
  return {
    left: `${(x0 * 100).toFixed(3)}%`,
    top: `${(y0 * 100).toFixed(3)}%`,
    width: `${((x1 - x0) * 100).toFixed(3)}%`,
    height: `${((y1 - y0) * 100).toFixed(3)}%`,
  };
}

/** Corner-form fractional rect [x0,y0,x1,y1] -> CSS percentage styles. */
export function cornerStyle(rect: [number, number, number, number]): {
  left: string;
  top: string;
  width: string;
  height: string;
} {
  const [x0, y0, x1, y1] = rect;
  return boxStyle({
    cx: (x0 + x1) / 2,
    cy: (y0 + y1) / 2,
    w: x1 - x0,
    h: y1 - y0,
  });
}

/** Fractional box -> pixel rect for a concrete viewport. */
export function toPixels(box: FracBox, width: number, height: number): PixelRect {
  return {
    x: (box.cx - box.w / 2) * width,
    y: (box.cy - box.h / 2) * height,
    w: box.w * width,
    h: box.h * height,
  };
}

/** Pixel rect back to fractions; inverse of toPixels for any viewport. */
export function toFraction(rect: PixelRect, width: number, height: number): FracBox {
  return {
    cx: (rect.x + rect.w / 2) / width,
    cy: (rect.y + rect.h / 2) / height,
    w: rect.w / width,
    h: rect.h / height,
  };
}

/** Pointer event position -> fractional image coordinates, clamped. */
export function pointerFraction(
  clientX: number,
  clientY: number,
  rect: { left: number; top: number; width: number; height: number },
): [number, number] {
  return [
    clamp01((clientX - rect.left) / rect.width),
    clamp01((clientY - rect.top) / rect.height),
  ];
}
