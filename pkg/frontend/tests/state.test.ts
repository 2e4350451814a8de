import { describe, expect, it } from "vitest";

import { STEP_ORDER, ViewState } from "../src/state";
import { FIXTURE_REPORT } from "./fixtures";

describe("step gating", () => {
  it("starts on the questionnaire", () => {
    const s = new ViewState();
    expect(s.step).toBe("questionnaire");
    expect(STEP_ORDER[0]).toBe("questionnaire");
  });

  it("refuses capture before a session exists", () => {
    const s = new ViewState();
    expect(s.canEnter("capture")).toBe(false);
    expect(() => s.goto("capture")).toThrow(/not reachable/);
  });

  it("walks forward one step at a time", () => {
    const s = new ViewState();
    s.sessionId = "s_1";
    s.goto("capture");
    expect(s.step).toBe("capture");
    expect(() => s.goto("results")).toThrow(/skip|not reachable/);
    s.imageIds.push("img_0");
    s.goto("annotate");
    expect(s.step).toBe("annotate");
  });

  it("blocks results until a report lands", () => {
    const s = new ViewState();
    s.sessionId = "s_1";
    s.imageIds.push("img_0");
    s.goto("capture");
    s.goto("annotate");
    expect(s.canEnter("results")).toBe(false);
    expect(() => s.goto("results")).toThrow(/not reachable/);
    s.setReport(FIXTURE_REPORT);
    expect(s.step).toBe("results");
    expect(s.report).toBe(FIXTURE_REPORT);
  });

  it("locks the pre-analysis steps once results exist", () => {
    const s = new ViewState();
    s.sessionId = "s_1";
    s.imageIds.push("img_0");
    s.goto("capture");
    s.goto("annotate");
    s.setReport(FIXTURE_REPORT);
    for (const step of ["questionnaire", "capture", "annotate"] as const) {
      expect(s.canEnter(step)).toBe(false);
    }
  });

  it("allows stepping back before analysis", () => {
    const s = new ViewState();
    s.sessionId = "s_1";
    s.imageIds.push("img_0");
    s.goto("capture");
    s.goto("annotate");
    s.goto("capture");
    expect(s.step).toBe("capture");
    s.goto("questionnaire");
    expect(s.step).toBe("questionnaire");
  });
});
