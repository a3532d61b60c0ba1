/**
 * Wire document schemas for the gateway protocol.
 *
 * Every HTTP body the gateway emits is validated here before anything is
 * rendered, so a malformed or future-versioned payload surfaces as a
 * banner instead of a half-drawn screen.
 */

import { z } from "zod";

export const SCHEMA_VERSION = 1;

export const ButtonSchema = z.object({
  label: z.string(),
  intent: z.string(),
});

const responseBase = {
  schema_version: z.literal(SCHEMA_VERSION),
  header: z.string().nullable(),
  body: z.string(),
  html_frame: z.string().nullable(),
  buttons: z.array(ButtonSchema),
  speak: z.array(z.string()),
  notification: z.boolean(),
};

export const SlidesDataSchema = z.object({
  boxes: z.array(z.object({ title: z.string(), body: z.string() })),
});

export const CheckboxDataSchema = z.object({
  options: z.array(
    z.object({ tag: z.string(), label: z.string(), checked: z.boolean() }),
  ),
  submit_label: z.string(),
});

export const EmotionCellSchema = z.object({
  sector: z.string(),
  intensity: z.string(),
  label: z.string(),
  sector_index: z.number().int(),
  ring_index: z.number().int(),
  angle_start: z.number(),
  angle_end: z.number(),
});

export const EmotionsDataSchema = z.object({
  cells: z.array(EmotionCellSchema),
});

export const DashboardDataSchema = z.object({
  tiles: z.array(z.object({ id: z.string(), title: z.string(), text: z.string() })),
  cta: z.object({ label: z.string(), intent: z.string() }).nullable(),
});

// Template kind and template_data travel together; the discriminated union
// rejects, say, an "emotions" document carrying checkbox options.
export const ResponseDocSchema = z.discriminatedUnion("template", [
  z.object({ ...responseBase, template: z.literal("default"), template_data: z.null() }),
  z.object({ ...responseBase, template: z.literal("slides"), template_data: SlidesDataSchema }),
  z.object({
    ...responseBase,
    template: z.literal("checkboxes"),
    template_data: CheckboxDataSchema,
  }),
  z.object({ ...responseBase, template: z.literal("emotions"), template_data: EmotionsDataSchema }),
  z.object({
    ...responseBase,
    template: z.literal("dashboard"),
    template_data: DashboardDataSchema,
  }),
]);

export type ResponseDoc = z.infer<typeof ResponseDocSchema>;
export type WireButton = z.infer<typeof ButtonSchema>;
export type EmotionCell = z.infer<typeof EmotionCellSchema>;
export type SlidesData = z.infer<typeof SlidesDataSchema>;
export type CheckboxData = z.infer<typeof CheckboxDataSchema>;
export type EmotionsData = z.infer<typeof EmotionsDataSchema>;
export type DashboardData = z.infer<typeof DashboardDataSchema>;

export class SchemaMismatch extends Error {
  constructor(detail: string) {
    super(`response document does not match the wire schema: ${detail}`);
    this.name = "SchemaMismatch";
  }
}

export function parseResponseDoc(raw: unknown): ResponseDoc {
  const result = ResponseDocSchema.safeParse(raw);
  if (!result.success) {
    const first = result.error.issues[0];
    const where = first && first.path.length ? first.path.join(".") : "document";
    throw new SchemaMismatch(`${where}: ${first ? first.message : "invalid"}`);
  }
  return result.data;
}

// -- user events --------------------------------------------------------------

export interface EventDoc {
  kind: string;
  timestamp?: number;
  text?: string;
  intent?: string;
  emotion?: { sector: string; intensity: string };
  tags?: string[];
}

export function utteranceEvent(text: string): EventDoc {
  return { kind: "utterance", text };
}

export function buttonEvent(intent: string): EventDoc {
  return { kind: "button", intent };
}

export function emotionEvent(sector: string, intensity: string): EventDoc {
  return { kind: "emotion_selected", emotion: { sector, intensity } };
}

export function checkboxEvent(tags: string[]): EventDoc {
  return { kind: "checkbox_submit", tags };
}

// -- other gateway documents ---------------------------------------------------

export const UserDocSchema = z.object({
  user_id: z.string(),
  name: z.string(),
  gender: z.string(),
  values: z.array(z.string()).optional(),
});

export const CreateSessionResultSchema = z.object({
  session_id: z.string(),
  user: UserDocSchema,
  response: z.unknown(),
});

export const SessionSummarySchema = z.object({
  session_id: z.string(),
  user_id: z.string(),
  current: z.object({ flow: z.string(), state: z.string() }),
  events: z.number().int(),
  therapy: z
    .object({
      step_index: z.number().int().nullable(),
      completed: z.boolean(),
      declared_emotion: z.string().nullable(),
      chosen_value: z.string().nullable(),
    })
    .optional(),
  response: z.unknown().optional(),
});

export type SessionSummary = z.infer<typeof SessionSummarySchema>;

export const SectionDocSchema = z.object({
  section_id: z.string(),
  title: z.string(),
  items: z.array(
    z.object({
      id: z.string(),
      kind: z.string(),
      body: z.string(),
      speech: z.string().nullable(),
    }),
  ),
});

export type SectionDoc = z.infer<typeof SectionDocSchema>;
