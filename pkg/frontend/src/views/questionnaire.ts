// Step 1: the intake questionnaire. One radio group per question; answers
// are choice indices, exactly what the server's schema expects.

import type { QuestionnaireSchema } from "../types";

export interface QuestionnaireCallbacks {
  onSubmit: (answers: Record<string, number>) => void;
  onSkip: () => void;
}

export function renderQuestionnaire(
  host: HTMLElement,
  schema: QuestionnaireSchema,
  callbacks: QuestionnaireCallbacks,
): void {
  host.innerHTML = `
    <section class="step step-questionnaire">
      <h2>About your mouth</h2>
      <p class="hint">Answers are optional but make the analysis more
      specific. You can skip and go straight to photos.</p>
      <form></form>
      <div class="actions">
        <button type="button" class="skip">Skip for now</button>
        <button type="button" class="submit" disabled>Continue</button>
      </div>
    </section>`;
  const form = host.querySelector("form")!;
  for (const q of schema.questions) {
    const block = document.createElement("fieldset");
    block.dataset.question = q.id;
    const legend = document.createElement("legend");
    legend.textContent = q.text;
    block.appendChild(legend);
    q.choices.forEach((choice, idx) => {
      const label = document.createElement("label");
      const input = document.createElement("input");
      input.type = "radio";
      input.name = q.id;
      input.value = String(idx);
      label.appendChild(input);
      label.appendChild(document.createTextNode(choice));
      block.appendChild(label);
    });
    form.appendChild(block);
  }

  const submit = host.querySelector<HTMLButtonElement>("button.submit")!;
  form.addEventListener("change", () => {
    submit.disabled = collect(form, schema) === null;
  });
  submit.addEventListener("click", () => {
    const answers = collect(form, schema);
    if (answers) callbacks.onSubmit(answers);
  });
  host
    .querySelector("button.skip")!
    .addEventListener("click", () => callbacks.onSkip());
}

/** All answers as choice indices, or null while any question is open. */
export function collect(
  form: HTMLElement,
  schema: QuestionnaireSchema,
): Record<string, number> | null {
  const answers: Record<string, number> = {};
  for (const q of schema.questions) {
    const checked = form.querySelector<HTMLInputElement>(
      `input[name="${q.id}"]:checked`,
    );
    if (!checked) return null;
    answers[q.id] = Number(checked.value);
  }
  return answers;
}
