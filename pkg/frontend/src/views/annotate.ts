// Step 3: mark where it hurts or bleeds. Strokes are recorded as fractional
// polylines and sent to the server exactly as drawn; the server rasterizes
// them, so its mask is the single source of truth. Strokes stay in the local
// list until a submit succeeds; a failed submit keeps them and offers retry.

import { pointerFraction } from "../overlay";
import type { Stroke } from "../types";

export interface AnnotateCallbacks {
  onSubmit: (strokes: Stroke[]) => Promise<void>;
  onSkip: () => void;
  onError: (message: string, retry: () => void) => void;
}

export interface AnnotateController {
  strokes: () => Stroke[];
}

export function renderAnnotate(
  host: HTMLElement,
  imageUrl: string,
  callbacks: AnnotateCallbacks,
): AnnotateController {
  host.innerHTML = `
    <section class="step step-annotate">
      <h2>Mark symptoms</h2>
      <p class="hint">Draw over the photo where you feel pain or see
      bleeding. Skip if there is nothing to mark.</p>
      <div class="channel-pick">
        <label><input type="radio" name="channel" value="pain" checked />pain</label>
        <label><input type="radio" name="channel" value="bleeding" />bleeding</label>
      </div>
      <div class="stage draw-stage">
        <img class="exam" alt="your oral photo" draggable="false" />
        <svg class="ink" viewBox="0 0 100 100" preserveAspectRatio="none"></svg>
      </div>
      <ul class="stroke-list"></ul>
      <div class="actions">
        <button type="button" class="undo" disabled>Undo stroke</button>
        <button type="button" class="skip">Nothing to mark</button>
        <button type="button" class="submit" disabled>Save marks</button>
      </div>
    </section>`;

  host.querySelector<HTMLImageElement>("img.exam")!.src = imageUrl;
  const stage = host.querySelector<HTMLElement>(".draw-stage")!;
  const ink = host.querySelector<SVGSVGElement>("svg.ink")!;
  const list = host.querySelector<HTMLUListElement>("ul.stroke-list")!;
  const undo = host.querySelector<HTMLButtonElement>("button.undo")!;
  const submit = host.querySelector<HTMLButtonElement>("button.submit")!;

  const strokes: Stroke[] = [];
  let active: Stroke | null = null;

  function channel(): "pain" | "bleeding" {
    const checked = host.querySelector<HTMLInputElement>(
      "input[name=channel]:checked",
    );
    return checked?.value === "bleeding" ? "bleeding" : "pain";
  }

  function redraw(): void {
    ink.innerHTML = "";
    for (const s of [...strokes, ...(active ? [active] : [])]) {
      const line = document.createElementNS(
        "http://www.w3.org/2000/svg",
        "polyline",
      );
      line.setAttribute(
        "points",
        s.points.map(([x, y]) => `${x * 100},${y * 100}`).join(" "),
      );
      line.setAttribute("class", `stroke-${s.channel}`);
      ink.appendChild(line);
    }
    list.innerHTML = strokes
      .map(
        (s, i) =>
          `<li>stroke ${i + 1}: ${s.channel}, ${s.points.length} point(s)</li>`,
      )
      .join("");
    undo.disabled = strokes.length === 0;
    submit.disabled = strokes.length === 0;
  }

  stage.addEventListener("pointerdown", (ev) => {
    const rect = stage.getBoundingClientRect();
    active = {
      channel: channel(),
      points: [pointerFraction(ev.clientX, ev.clientY, rect)],
    };
    redraw();
  });
  stage.addEventListener("pointermove", (ev) => {
    if (!active) return;
    const rect = stage.getBoundingClientRect();
    active.points.push(pointerFraction(ev.clientX, ev.clientY, rect));
    redraw();
  });
  const finish = () => {
    if (!active) return;
    strokes.push(active);
    active = null;
    redraw();
  };
  stage.addEventListener("pointerup", finish);
  stage.addEventListener("pointerleave", finish);

  undo.addEventListener("click", () => {
    strokes.pop();
    redraw();
  });
  host.querySelector("button.skip")!.addEventListener("click", () => {
    callbacks.onSkip();
  });

  const doSubmit = () => {
    submit.disabled = true;
    callbacks.onSubmit([...strokes]).catch((err) => {
      // keep the strokes; the user can retry the identical payload
      submit.disabled = false;
      callbacks.onError(String(err?.message ?? err), doSubmit);
    });
  };
  submit.addEventListener("click", doSubmit);

  return { strokes: () => [...strokes] };
}
