// Workflow state machine. Steps only move along the exam order, and the
// results step opens only once a report actually exists, so the UI can never
// show numbers it does not have.

import type { Report } from "./types";

export type Step = "questionnaire" | "capture" | "annotate" | "results";

export const STEP_ORDER: Step[] = [
  "questionnaire",
  "capture",
  "annotate",
  "results",
];

export interface OverlayToggles {
  boxes: boolean;
  heatmap: boolean;
  opacity: number; // heatmap blend, 0..1
}

export class ViewState {
  step: Step = "questionnaire";
  sessionId: string | null = null;
  imageIds: string[] = [];
  report: Report | null = null;
  overlay: OverlayToggles = { boxes: true, heatmap: true, opacity: 0.5 };

  canEnter(step: Step): boolean {
    switch (step) {
      case "questionnaire":
        return this.report === null;
      case "capture":
        return this.sessionId !== null && this.report === null;
      case "annotate":
        return this.imageIds.length > 0 && this.report === null;
      case "results":
        return this.report !== null;
    }
  }

  goto(step: Step): void {
    if (!this.canEnter(step)) {
      throw new Error(`step ${step} is not reachable yet`);
    }
    const from = STEP_ORDER.indexOf(this.step);
    const to = STEP_ORDER.indexOf(step);
    if (to > from + 1) {
      throw new Error(`cannot skip from ${this.step} to ${step}`);
    }
    this.step = step;
  }

  /** Record a successful analyze; unlocks and enters results. */
  setReport(report: Report): void {
    this.report = report;
    this.step = "results";
  }
}
