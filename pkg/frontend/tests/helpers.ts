/** Shared document builders mirroring what the gateway actually emits. */

import { EmotionCell, ResponseDoc } from "../src/types.js";

export const SECTORS = [
  "joy",
  "trust",
  "fear",
  "surprise",
  "sadness",
  "disgust",
  "anger",
  "anticipation",
];

// Ring 0 is the innermost (strongest) ring on the wire.
export const RING_BY_INTENSITY: Record<string, number> = { high: 0, medium: 1, low: 2 };

export function fixtureCells(): EmotionCell[] {
  const cells: EmotionCell[] = [];
  SECTORS.forEach((sector, sectorIndex) => {
    for (const intensity of ["high", "medium", "low"]) {
      cells.push({
        sector,
        intensity,
        label: `${intensity} ${sector}`,
        sector_index: sectorIndex,
        ring_index: RING_BY_INTENSITY[intensity],
        angle_start: 45 * sectorIndex,
        angle_end: 45 * (sectorIndex + 1),
      });
    }
  });
  return cells;
}

export function defaultDoc(overrides: Partial<ResponseDoc> = {}): ResponseDoc {
  return {
    schema_version: 1,
    template: "default",
    header: "What would you like to learn about?",
    body: "Pick a topic, or just say it.",
    html_frame: null,
    buttons: [
      { label: "Facts and myths", intent: "open_facts" },
      { label: "Main menu", intent: "go_home" },
    ],
    speak: ["What would you like to learn about?"],
    notification: false,
    template_data: null,
    ...overrides,
  } as ResponseDoc;
}

export function slidesDoc(): ResponseDoc {
  return defaultDoc({
    template: "slides",
    template_data: {
      boxes: [
        { title: "Myth", body: "Antibiotics cure everything." },
        { title: "Fact", body: "They do nothing against viruses." },
      ],
    },
  } as Partial<ResponseDoc>);
}

export function checkboxDoc(): ResponseDoc {
  return defaultDoc({
    template: "checkboxes",
    template_data: {
      options: [
        { tag: "family", label: "Family", checked: false },
        { tag: "health", label: "Health", checked: true },
        { tag: "friends", label: "Friends", checked: false },
      ],
      submit_label: "Done",
    },
  } as Partial<ResponseDoc>);
}

export function emotionsDoc(): ResponseDoc {
  return defaultDoc({
    template: "emotions",
    template_data: { cells: fixtureCells() },
  } as Partial<ResponseDoc>);
}

export function dashboardDoc(): ResponseDoc {
  return defaultDoc({
    template: "dashboard",
    template_data: {
      tiles: [
        { id: "weather", title: "Weather today", text: "Sunny, 21 degrees." },
        { id: "briefing", title: "Daily health update", text: "A calm week." },
      ],
      cta: { label: "Tell me how you feel", intent: "go_emotions" },
    },
  } as Partial<ResponseDoc>);
}

export function jsonResponse(doc: unknown, status = 200): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "content-type": "application/json" },
  });
}
