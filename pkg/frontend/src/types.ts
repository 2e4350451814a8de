// Shapes of the exam service's JSON payloads. The UI treats these as the
// single source of truth: levels, scores, and box geometry are displayed
// verbatim, never recomputed client-side.

export type Level = "unlikely" | "likely" | "very_likely";

export const LEVEL_ORDER: Level[] = ["very_likely", "likely", "unlikely"];

export interface ReportBox {
  condition: string;
  cx: number;
  cy: number;
  w: number;
  h: number;
  confidence: number;
}

export interface Finding {
  condition: string;
  task_form: "localized" | "image_level";
  score: number;
  level: Level;
  boxes: ReportBox[];
  heatmap_ref: string | null;
  description: string;
  typical_appearance: string;
  suggestions: string[];
}

export interface ImageResult {
  image_id: string;
  image_ref: string;
  findings: Finding[];
}

export interface Report {
  schema_version: number;
  session_id: string;
  model_flag: string;
  generated_at: string;
  config_hash: string;
  images: ImageResult[];
}

export interface Question {
  id: string;
  text: string;
  choices: string[];
}

export interface QuestionnaireSchema {
  questions: Question[];
}

export interface Stroke {
  channel: "pain" | "bleeding";
  points: [number, number][];
  radius?: number;
}

export interface AnnotateSummary {
  image_id: string;
  stroke_count: number;
  pain_pixels: number;
  bleeding_pixels: number;
}

// Both boxes in fractional [x0, y0, x1, y1] image coordinates.
export interface Guide {
  dashed: [number, number, number, number];
  solid: [number, number, number, number];
}

export function isReport(value: unknown): value is Report {
  const r = value as Report;
  return (
    !!r &&
    typeof r.session_id === "string" &&
    Array.isArray(r.images) &&
    r.images.every((im) => Array.isArray(im.findings))
  );
}
