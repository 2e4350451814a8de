// Step 4: the report. Conditions are grouped by the server-assigned level
// (most serious first) and expand into description, typical appearance, and
// suggestions. Box overlays live in fractional coordinates as percentage
// styles, so they track the image at any rendered size; heatmaps blend over
// the photo with an adjustable opacity.

import { boxStyle } from "../overlay";
import type { OverlayToggles } from "../state";
import type { Finding, Level, Report } from "../types";
import { LEVEL_ORDER } from "../types";

/** Findings of one image bucketed by level, most serious level first. */
export function groupByLevel(findings: Finding[]): [Level, Finding[]][] {
  return LEVEL_ORDER.map(
    (level) =>
      [level, findings.filter((f) => f.level === level)] as [Level, Finding[]],
  ).filter(([, fs]) => fs.length > 0);
}

const pretty = (s: string) => s.replace(/_/g, " ");

export interface ResultsOptions {
  overlay: OverlayToggles;
  imageUrl: (imageId: string, imageRef: string) => string;
  artifactUrl: (ref: string) => string;
}

export function renderResults(
  host: HTMLElement,
  report: Report,
  options: ResultsOptions,
): void {
  host.innerHTML = `
    <section class="step step-results">
      <h2>Your report</h2>
      <p class="hint">Screening only, not a diagnosis. Conditions the model
      rates as very likely come first; open any row for more detail.
      Analyzed with the ${report.model_flag} model.</p>
      <div class="report-images"></div>
    </section>`;
  const container = host.querySelector<HTMLElement>(".report-images")!;

  for (const image of report.images) {
    const panel = document.createElement("article");
    panel.className = "image-panel";
    panel.dataset.imageId = image.image_id;
    panel.innerHTML = `
      <div class="stage result-stage">
        <img class="exam" alt="analyzed oral photo" />
        <img class="heatmap" alt="" hidden />
        <div class="box-layer"></div>
      </div>
      <div class="overlay-controls">
        <label><input type="checkbox" class="toggle-boxes" checked />boxes</label>
        <label><input type="checkbox" class="toggle-heatmap" checked />heatmap</label>
        <label class="opacity-ctl">opacity
          <input type="range" class="opacity" min="0" max="1" step="0.05" />
        </label>
      </div>
      <div class="level-groups"></div>`;

    panel.querySelector<HTMLImageElement>("img.exam")!.src = options.imageUrl(
      image.image_id,
      image.image_ref,
    );

    const boxLayer = panel.querySelector<HTMLElement>(".box-layer")!;
    const heatmapImg = panel.querySelector<HTMLImageElement>("img.heatmap")!;
    const groupsHost = panel.querySelector<HTMLElement>(".level-groups")!;

    for (const [level, findings] of groupByLevel(image.findings)) {
      const group = document.createElement("div");
      group.className = `level-group level-${level}`;
      group.dataset.level = level;
      const heading = document.createElement("h3");
      heading.textContent = pretty(level);
      group.appendChild(heading);
      for (const finding of findings) {
        group.appendChild(renderFinding(finding, boxLayer, heatmapImg, options));
      }
      groupsHost.appendChild(group);
    }

    wireOverlayControls(panel, options.overlay, heatmapImg, boxLayer);
    container.appendChild(panel);
  }
}

function renderFinding(
  finding: Finding,
  boxLayer: HTMLElement,
  heatmapImg: HTMLImageElement,
  options: ResultsOptions,
): HTMLElement {
  const row = document.createElement("details");
  row.className = "finding";
  row.dataset.condition = finding.condition;
  const summary = document.createElement("summary");
  summary.innerHTML =
    `<span class="name">${pretty(finding.condition)}</span>` +
    `<span class="level">${pretty(finding.level)}</span>` +
    `<span class="score">score ${finding.score.toFixed(3)}</span>`;
  row.appendChild(summary);

  const body = document.createElement("div");
  body.className = "finding-body";
  const para = (cls: string, text: string) => {
    if (!text) return;
    const p = document.createElement("p");
    p.className = cls;
    p.textContent = text;
    body.appendChild(p);
  };
  para("description", finding.description);
  para("appearance", finding.typical_appearance);
  if (finding.suggestions.length > 0) {
    const ul = document.createElement("ul");
    ul.className = "suggestions";
    for (const s of finding.suggestions) {
      const li = document.createElement("li");
      li.textContent = s;
      ul.appendChild(li);
    }
    body.appendChild(ul);
  }
  row.appendChild(body);

  // Evidence overlays: boxes for localized findings, heatmap for diffuse.
  for (const box of finding.boxes) {
    const el = document.createElement("div");
    el.className = "overlay-box";
    el.dataset.condition = finding.condition;
    el.title = `${pretty(finding.condition)} (${box.confidence.toFixed(2)})`;
    Object.assign(el.style, boxStyle(box));
    boxLayer.appendChild(el);
  }
  if (finding.heatmap_ref && heatmapImg.hidden) {
    heatmapImg.src = options.artifactUrl(finding.heatmap_ref);
    heatmapImg.hidden = false;
  }
  return row;
}

function wireOverlayControls(
  panel: HTMLElement,
  overlay: OverlayToggles,
  heatmapImg: HTMLImageElement,
  boxLayer: HTMLElement,
): void {
  const boxesToggle = panel.querySelector<HTMLInputElement>(".toggle-boxes")!;
  const heatToggle = panel.querySelector<HTMLInputElement>(".toggle-heatmap")!;
  const opacity = panel.querySelector<HTMLInputElement>("input.opacity")!;

  boxesToggle.checked = overlay.boxes;
  heatToggle.checked = overlay.heatmap;
  opacity.value = String(overlay.opacity);

  const apply = () => {
    boxLayer.style.display = overlay.boxes ? "" : "none";
    heatmapImg.style.opacity = String(overlay.heatmap ? overlay.opacity : 0);
  };
  boxesToggle.addEventListener("change", () => {
    overlay.boxes = boxesToggle.checked;
    apply();
  });
  heatToggle.addEventListener("change", () => {
    overlay.heatmap = heatToggle.checked;
    apply();
  });
  opacity.addEventListener("input", () => {
    overlay.opacity = Number(opacity.value);
    apply();
  });
  apply();
}
