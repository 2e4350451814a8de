// Thin fetch client for the exam service. Every failure becomes an ApiError
// carrying the server's error category and detail, so views can show a
// meaningful, retryable banner.

import type {
  AnnotateSummary,
  Guide,
  QuestionnaireSchema,
  Report,
  Stroke,
} from "./types";

let base = "";

/** Point the client at another origin (tests; production reverse proxy). */
export function setApiBase(url: string): void {
  base = url.replace(/\/$/, "");
}

export class ApiError extends Error {
  status: number;
  category: string;

  constructor(status: number, category: string, detail: string) {
    super(detail);
    this.status = status;
    this.category = category;
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(base + path, init);
  } catch (err) {
    throw new ApiError(0, "network", `cannot reach the exam service: ${err}`);
  }
  if (!resp.ok) {
    let category = "error";
    let detail = `${resp.status} ${resp.statusText}`;
    try {
      const body = (await resp.json()) as { error?: string; detail?: string };
      category = body.error ?? category;
      detail = body.detail ?? detail;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(resp.status, category, detail);
  }
  return (await resp.json()) as T;
}

function json(body: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  };
}

export const api = {
  questionnaire(): Promise<QuestionnaireSchema> {
    return request("/questionnaire");
  },

  createSession(): Promise<{ session_id: string; status: string }> {
    return request("/sessions", { method: "POST" });
  },

  submitQuestionnaire(
    sessionId: string,
    answers: Record<string, number>,
  ): Promise<{ questionnaire_complete: boolean }> {
    return request(`/sessions/${sessionId}/questionnaire`, {
      ...json({ answers }),
      method: "PUT",
    });
  },

  uploadImage(
    sessionId: string,
    file: Blob,
    filename: string,
    guide: Guide,
  ): Promise<{ image_id: string }> {
    const form = new FormData();
    form.append("file", file, filename);
    form.append("guide", JSON.stringify(guide));
    return request(`/sessions/${sessionId}/images`, {
      method: "POST",
      body: form,
    });
  },

  annotate(
    sessionId: string,
    imageId: string,
    strokes: Stroke[],
  ): Promise<AnnotateSummary> {
    return request(
      `/sessions/${sessionId}/images/${imageId}/annotations`,
      json({ strokes }),
    );
  },

  analyze(sessionId: string): Promise<Report> {
    return request(`/sessions/${sessionId}/analyze`, { method: "POST" });
  },

  report(sessionId: string): Promise<Report> {
    return request(`/sessions/${sessionId}/report`);
  },

  imageUrl(sessionId: string, imageId: string): string {
    return `${base}/sessions/${sessionId}/images/${imageId}`;
  },

  artifactUrl(ref: string): string {
    return base + ref;
  },
};
