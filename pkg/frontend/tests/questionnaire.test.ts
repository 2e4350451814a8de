// @vitest-environment jsdom

import { beforeEach, describe, expect, it, vi } from "vitest";

import { collect, renderQuestionnaire } from "../src/views/questionnaire";
import { FIXTURE_SCHEMA } from "./fixtures";

function render(onSubmit = vi.fn(), onSkip = vi.fn()) {
  const host = document.createElement("div");
  document.body.appendChild(host);
  renderQuestionnaire(host, FIXTURE_SCHEMA, { onSubmit, onSkip });
  return { host, onSubmit, onSkip };
}

function pick(host: HTMLElement, qid: string, choice: number): void {
  const radio = host.querySelector<HTMLInputElement>(
    `input[name="${qid}"][value="${choice}"]`,
  )!;
  radio.checked = true;
  radio.dispatchEvent(new Event("change", { bubbles: true }));
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("questionnaire view", () => {
  it("renders every question with its choices", () => {
    const { host } = render();
    expect(host.querySelectorAll("fieldset")).toHaveLength(3);
    const first = host.querySelector("fieldset")!;
    expect(first.textContent).toContain("How often do you brush?");
    expect(first.querySelectorAll('input[type="radio"]')).toHaveLength(3);
  });

  it("keeps submit disabled until every question is answered", () => {
    const { host } = render();
    const submit = host.querySelector<HTMLButtonElement>("button.submit")!;
    expect(submit.disabled).toBe(true);
    pick(host, "brushing", 0);
    pick(host, "gum_bleeding", 2);
    expect(submit.disabled).toBe(true);
    pick(host, "last_visit", 1);
    expect(submit.disabled).toBe(false);
  });

  it("hands the chosen indices to onSubmit", () => {
    const { host, onSubmit } = render();
    pick(host, "brushing", 1);
    pick(host, "gum_bleeding", 2);
    pick(host, "last_visit", 3);
    host.querySelector<HTMLButtonElement>("button.submit")!.click();
    expect(onSubmit).toHaveBeenCalledWith({ brushing: 1, gum_bleeding: 2, last_visit: 3 });
  });

  it("collect returns null while answers are missing", () => {
    const { host } = render();
    pick(host, "brushing", 0);
    expect(collect(host.querySelector("form")!, FIXTURE_SCHEMA)).toBeNull();
    pick(host, "gum_bleeding", 0);
    pick(host, "last_visit", 0);
    expect(collect(host.querySelector("form")!, FIXTURE_SCHEMA)).toEqual({
      brushing: 0,
      gum_bleeding: 0,
      last_visit: 0,
    });
  });

  it("offers a skip path that bypasses validation", () => {
    const { host, onSkip, onSubmit } = render();
    host.querySelector<HTMLButtonElement>("button.skip")!.click();
    expect(onSkip).toHaveBeenCalledOnce();
    expect(onSubmit).not.toHaveBeenCalled();
  });
});
