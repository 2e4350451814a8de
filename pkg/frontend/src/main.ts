// Wires the four steps to the exam service. All mutations await the server;
// the report view renders only what analyze returned.

import { api, ApiError } from "./api";
import { clearBanner, showBanner } from "./banner";
import { type Step, ViewState } from "./state";
import type { Guide, QuestionnaireSchema } from "./types";
import { renderAnnotate } from "./views/annotate";
import { DEFAULT_GUIDE, renderCapture } from "./views/capture";
import { renderQuestionnaire } from "./views/questionnaire";
import { renderResults } from "./views/results";

const app = document.querySelector<HTMLElement>("#app");
if (app) void boot(app);

async function boot(root: HTMLElement): Promise<void> {
  root.innerHTML = `
    <header>
      <h1>Oral self-exam</h1>
      <nav class="steps"></nav>
    </header>
    <main></main>`;
  const main = root.querySelector<HTMLElement>("main")!;
  const state = new ViewState();

  let schema: QuestionnaireSchema;
  try {
    schema = await api.questionnaire();
    state.sessionId = (await api.createSession()).session_id;
  } catch (err) {
    showBanner(root, describe(err), () => void boot(root));
    return;
  }

  const nav = root.querySelector<HTMLElement>("nav.steps")!;
  const render = () => {
    clearBanner(root);
    nav.innerHTML = ["questionnaire", "capture", "annotate", "results"]
      .map(
        (s) =>
          `<span class="${s === state.step ? "current" : ""}">${s}</span>`,
      )
      .join(" › ");
    views[state.step]();
  };

  const guarded = (work: () => Promise<void>) => {
    work().catch((err) => showBanner(root, describe(err), () => guarded(work)));
  };

  const views: Record<Step, () => void> = {
    questionnaire: () =>
      renderQuestionnaire(main, schema, {
        onSubmit: (answers) =>
          guarded(async () => {
            await api.submitQuestionnaire(state.sessionId!, answers);
            state.goto("capture");
            render();
          }),
        onSkip: () => {
          state.goto("capture");
          render();
        },
      }),

    capture: () =>
      renderCapture(main, DEFAULT_GUIDE satisfies Guide, {
        onUpload: (file, filename, guide) =>
          guarded(async () => {
            const { image_id } = await api.uploadImage(
              state.sessionId!,
              file,
              filename,
              guide,
            );
            state.imageIds.push(image_id);
            state.goto("annotate");
            render();
          }),
      }),

    annotate: () => {
      const imageId = state.imageIds[state.imageIds.length - 1]!;
      const analyze = async () => {
        const report = await api.analyze(state.sessionId!);
        state.setReport(report);
        render();
      };
      renderAnnotate(main, api.imageUrl(state.sessionId!, imageId), {
        onSubmit: async (strokes) => {
          await api.annotate(state.sessionId!, imageId, strokes);
          await analyze();
        },
        onSkip: () => guarded(analyze),
        onError: (message, retry) => showBanner(root, message, retry),
      });
    },

    results: () => {
      renderResults(main, state.report!, {
        overlay: state.overlay,
        imageUrl: (imageId) => api.imageUrl(state.sessionId!, imageId),
        artifactUrl: (ref) => api.artifactUrl(ref),
      });
    },
  };

  render();
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.category}: ${err.message}`;
  }
  return String(err);
}
