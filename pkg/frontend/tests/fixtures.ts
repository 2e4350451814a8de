// Hand-built report and schema in the exact JSON shapes the service emits:
// findings in canonical condition order, boxes only on localized conditions,
// heatmap refs only on diffuse ones.

import type { QuestionnaireSchema, Report } from "../src/types";

export const FIXTURE_REPORT: Report = {
  schema_version: 1,
  session_id: "s_fixture",
  model_flag: "baseline",
  generated_at: "2026-08-25T12:00:00+00:00",
  config_hash: "deadbeef00112233",
  images: [
    {
      image_id: "img_0",
      image_ref: "/sessions/s_fixture/images/img_0",
      findings: [
        {
          condition: "periodontal_disease",
          task_form: "localized",
          score: 0.91,
          level: "very_likely",
          boxes: [
            {
              condition: "periodontal_disease",
              cx: 0.3,
              cy: 0.4,
              w: 0.2,
              h: 0.15,
              confidence: 0.91,
            },
            {
              condition: "periodontal_disease",
              cx: 0.7,
              cy: 0.62,
              w: 0.1,
              h: 0.1,
              confidence: 0.55,
            },
          ],
          heatmap_ref: null,
          description: "Signs of inflamed or receding gums.",
          typical_appearance: "Red, swollen gum margins that bleed easily.",
          suggestions: [
            "Brush gently along the gum line",
            "See a dentist about a periodontal check",
          ],
        },
        {
          condition: "caries",
          task_form: "localized",
          score: 0.64,
          level: "likely",
          boxes: [
            {
              condition: "caries",
              cx: 0.52,
              cy: 0.25,
              w: 0.12,
              h: 0.12,
              confidence: 0.64,
            },
          ],
          heatmap_ref: null,
          description: "Possible tooth decay.",
          typical_appearance: "Dark pits or spots on the tooth surface.",
          suggestions: ["Book a dental examination"],
        },
        {
          condition: "dental_calculus",
          task_form: "localized",
          score: 0.08,
          level: "unlikely",
          boxes: [],
          heatmap_ref: null,
          description: "Hardened plaque near the gum line.",
          typical_appearance: "",
          suggestions: [],
        },
        {
          condition: "soft_deposit",
          task_form: "image_level",
          score: 0.71,
          level: "likely",
          boxes: [],
          heatmap_ref: "/sessions/s_fixture/artifacts/heatmap_img_0_soft_deposit.png",
          description: "Soft plaque buildup on the teeth.",
          typical_appearance: "Pale film, often near the gums.",
          suggestions: ["Clean between teeth daily"],
        },
        {
          condition: "discoloration",
          task_form: "image_level",
          score: 0.22,
          level: "unlikely",
          boxes: [],
          heatmap_ref: null,
          description: "Staining of the tooth surface.",
          typical_appearance: "",
          suggestions: [],
        },
      ],
    },
  ],
};

/** Same five conditions, everything unlikely, no evidence overlays. */
export const ALL_CLEAR_REPORT: Report = {
  ...FIXTURE_REPORT,
  images: [
    {
      ...FIXTURE_REPORT.images[0]!,
      findings: FIXTURE_REPORT.images[0]!.findings.map((f) => ({
        ...f,
        score: 0.03,
        level: "unlikely" as const,
        boxes: [],
        heatmap_ref: null,
        suggestions: [],
      })),
    },
  ],
};

export const FIXTURE_SCHEMA: QuestionnaireSchema = {
  questions: [
    {
      id: "brushing",
      text: "How often do you brush?",
      choices: ["Twice a day or more", "Once a day", "Less than daily"],
    },
    {
      id: "gum_bleeding",
      text: "Do your gums bleed when brushing?",
      choices: ["Never", "Sometimes", "Often"],
    },
    {
      id: "last_visit",
      text: "Last dental visit?",
      choices: ["Under a year", "1-2 years", "2-5 years", "Over 5 years"],
    },
  ],
};
