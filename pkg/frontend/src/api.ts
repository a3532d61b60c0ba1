/**
 * Thin HTTP client for the gateway. Talks only the documented endpoints;
 * every response body passes through the zod schemas in types.ts.
 */

import {
  CreateSessionResultSchema,
  EventDoc,
  parseResponseDoc,
  ResponseDoc,
  SectionDoc,
  SectionDocSchema,
  SessionSummary,
  SessionSummarySchema,
  UserDocSchema,
} from "./types.js";
import { z } from "zod";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface CreateSessionResult {
  sessionId: string;
  user: z.infer<typeof UserDocSchema>;
  response: ResponseDoc;
}

export interface NotificationStream {
  close(): void;
  done: Promise<void>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorMessage(response: Response): Promise<string> {
  try {
    const doc = await response.json();
    if (doc && typeof doc.error === "string") return doc.error;
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `request failed with status ${response.status}`;
}

export class GatewayClient {
  private fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string = "",
    fetchFn?: FetchLike,
  ) {
    const fn = fetchFn ?? (globalThis.fetch as FetchLike);
    if (!fn) throw new Error("no fetch implementation available");
    this.fetchFn = (input, init) => fn(input, init);
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorMessage(response));
    }
    return response.json();
  }

  private post(path: string, body: unknown): Promise<unknown> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async health(): Promise<boolean> {
    try {
      const doc = (await this.request("/api/health")) as { status?: string };
      return doc.status === "ok";
    } catch {
      return false;
    }
  }

  async createSession(
    userId: string,
    name?: string,
    gender?: string,
  ): Promise<CreateSessionResult> {
    const doc = CreateSessionResultSchema.parse(
      await this.post("/api/sessions", { user_id: userId, name, gender }),
    );
    return {
      sessionId: doc.session_id,
      user: doc.user,
      response: parseResponseDoc(doc.response),
    };
  }

  async postEvent(sessionId: string, event: EventDoc): Promise<ResponseDoc> {
    const doc = await this.post(
      `/api/sessions/${encodeURIComponent(sessionId)}/events`,
      event,
    );
    return parseResponseDoc(doc);
  }

  async getSession(sessionId: string): Promise<SessionSummary> {
    const doc = await this.request(`/api/sessions/${encodeURIComponent(sessionId)}`);
    return SessionSummarySchema.parse(doc);
  }

  async getResponse(sessionId: string): Promise<ResponseDoc> {
    const doc = await this.request(
      `/api/sessions/${encodeURIComponent(sessionId)}/response`,
    );
    return parseResponseDoc(doc);
  }

  async getSection(sectionId: string): Promise<SectionDoc> {
    const doc = await this.request(`/api/content/${encodeURIComponent(sectionId)}`);
    return SectionDocSchema.parse(doc);
  }

  async getFeedback(
    itemId: string,
  ): Promise<{ item: string; helpful: number; not_helpful: number }> {
    return (await this.request(
      `/api/feedback/${encodeURIComponent(itemId)}`,
    )) as { item: string; helpful: number; not_helpful: number };
  }

  async submitInstrument(
    sessionId: string,
    kind: string,
    body: unknown,
  ): Promise<Record<string, unknown>> {
    const doc = (await this.post(
      `/api/sessions/${encodeURIComponent(sessionId)}/instruments/${encodeURIComponent(kind)}`,
      body,
    )) as { kind?: string; result?: Record<string, unknown> };
    if (!doc || typeof doc !== "object" || typeof doc.result !== "object") {
      throw new ApiError(502, "instrument response missing a result");
    }
    return doc.result as Record<string, unknown>;
  }

  /**
   * Subscribe to the server-push channel. Parsed documents are handed to
   * onDoc; malformed frames go to onError but keep the stream alive.
   * EventSource is not available everywhere we run, so this reads the SSE
   * byte stream directly.
   */
  openNotifications(
    sessionId: string,
    onDoc: (doc: ResponseDoc) => void,
    onError?: (error: unknown) => void,
  ): NotificationStream {
    const controller = new AbortController();
    const done = (async () => {
      const response = await this.fetchFn(
        `${this.baseUrl}/api/notifications/${encodeURIComponent(sessionId)}`,
        { signal: controller.signal },
      );
      if (!response.ok || !response.body) {
        throw new ApiError(response.status, await errorMessage(response));
      }
      const reader = response.body.getReader();
      controller.signal.addEventListener(
        "abort",
        () => void reader.cancel().catch(() => {}),
        { once: true },
      );
      const decoder = new TextDecoder();
      let buffer = "";
      for (;;) {
        const { value, done: finished } = await reader.read();
        if (finished) break;
        buffer += decoder.decode(value, { stream: true });
        let cut;
        while ((cut = buffer.indexOf("\n\n")) >= 0) {
          const frame = buffer.slice(0, cut);
          buffer = buffer.slice(cut + 2);
          for (const line of frame.split("\n")) {
            if (!line.startsWith("data: ")) continue; // comments keep-alive
            try {
              onDoc(parseResponseDoc(JSON.parse(line.slice(6))));
            } catch (error) {
              if (onError) onError(error);
            }
          }
        }
      }
    })().catch((error) => {
      if (controller.signal.aborted) return;
      if (onError) onError(error);
    });
    return { close: () => controller.abort(), done };
  }
}
