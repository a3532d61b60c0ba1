import { afterEach, describe, expect, it } from "vitest";

import { mountApp } from "../src/app.js";
import { Recognizer, Speaker } from "../src/speech.js";
import { ResponseDoc } from "../src/types.js";
import { dashboardDoc, defaultDoc, jsonResponse } from "./helpers.js";

interface FakeBackend {
  fetch: (url: string, init?: RequestInit) => Promise<Response>;
  events: Array<Record<string, unknown>>;
  instrumentBodies: Array<Record<string, unknown>>;
  nextDoc: ResponseDoc | Record<string, unknown>;
  failNext: { status: number; error: string } | null;
}

function fakeBackend(first: ResponseDoc = dashboardDoc()): FakeBackend {
  const backend: FakeBackend = {
    events: [],
    instrumentBodies: [],
    nextDoc: defaultDoc(),
    failNext: null,
    fetch: async (url, init) => {
      if (url.endsWith("/api/sessions") && init?.method === "POST") {
        return jsonResponse(
          {
            session_id: "sess1",
            user: { user_id: "u1", name: "Maria", gender: "female", values: [] },
            response: first,
          },
          201,
        );
      }
      if (url.endsWith("/events")) {
        if (backend.failNext) {
          const { status, error } = backend.failNext;
          backend.failNext = null;
          return jsonResponse({ error }, status);
        }
        backend.events.push(JSON.parse(String(init!.body)));
        return jsonResponse(backend.nextDoc);
      }
      if (url.includes("/instruments/")) {
        backend.instrumentBodies.push(JSON.parse(String(init!.body)));
        return jsonResponse({ kind: "sus", result: { score: 50.0, grade: "below_average" } });
      }
      throw new Error(`unexpected url ${url}`);
    },
  };
  return backend;
}

interface RecordingSpeaker extends Speaker {
  spoken: string[][];
  actions: string[];
}

function recordingSpeaker(): RecordingSpeaker {
  const speaker: RecordingSpeaker = {
    available: true,
    rate: 1,
    spoken: [],
    actions: [],
    speak(segments) {
      this.spoken.push([...segments]);
      this.actions.push("speak");
    },
    cancel() {
      this.actions.push("cancel");
    },
  };
  return speaker;
}

const silentRecognizer: Recognizer = {
  available: false,
  start: (_onText, onError) => onError("unavailable"),
  stop: () => {},
};

let mounted: { dispose(): void } | null = null;

afterEach(() => {
  mounted?.dispose();
  mounted = null;
  document.body.textContent = "";
});

async function mount(backend: FakeBackend, speaker: Speaker = recordingSpeaker(), recognizer = silentRecognizer) {
  const root = document.createElement("div");
  document.body.appendChild(root);
  const ui = await mountApp(root, {
    baseUrl: "http://test",
    userId: "u1",
    name: "Maria",
    gender: "female",
    fetchFn: backend.fetch,
    speaker,
    recognizer,
    subscribe: false,
  });
  mounted = ui;
  return { root, ui };
}

describe("mounting", () => {
  it("creates a session, renders the first view and speaks it", async () => {
    const backend = fakeBackend();
    const speaker = recordingSpeaker();
    const { root, ui } = await mount(backend, speaker);
    expect(ui.sessionId).toBe("sess1");
    expect(root.querySelectorAll(".tile")).toHaveLength(2);
    expect(root.querySelector(".line.bot")!.textContent).toContain(
      "What would you like to learn about?",
    );
    expect(speaker.spoken).toEqual([["What would you like to learn about?"]]);
  });
});

describe("interactions", () => {
  it("routes suggestion taps to button events and re-renders", async () => {
    const backend = fakeBackend();
    const { root, ui } = await mount(backend);
    backend.nextDoc = defaultDoc({ header: "Facts", buttons: [] });
    (root.querySelector('button[data-intent="go_home"]') as HTMLButtonElement).click();
    await ui.settle();
    expect(backend.events).toEqual([{ kind: "button", intent: "go_home" }]);
    expect(root.querySelector(".view-header")!.textContent).toBe("Facts");
    // The tap is echoed with the button label, not the intent id.
    expect(root.querySelector(".line.you")!.textContent).toBe("Main menu");
  });

  it("sends composer text as an utterance event", async () => {
    const backend = fakeBackend();
    const { root, ui } = await mount(backend);
    const input = root.querySelector("input.say-box") as HTMLInputElement;
    input.value = "  calming exercise  ";
    root
      .querySelector("form.composer")!
      .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await ui.settle();
    expect(backend.events).toEqual([{ kind: "utterance", text: "calming exercise" }]);
    expect(root.querySelector(".line.you")!.textContent).toBe("calming exercise");
    expect(input.value).toBe("");
  });

  it("cancels running speech before sending any event", async () => {
    const backend = fakeBackend();
    const speaker = recordingSpeaker();
    const { root, ui } = await mount(backend, speaker);
    (root.querySelector("button.suggestion") as HTMLButtonElement).click();
    await ui.settle();
    // mount speak, then cancel on tap, then speak for the new document
    expect(speaker.actions).toEqual(["speak", "cancel", "speak"]);
  });

  it("accepts only one in-flight event at a time", async () => {
    const backend = fakeBackend();
    let release!: () => void;
    const gate = new Promise<void>((resolve) => (release = resolve));
    const slowFetch = async (url: string, init?: RequestInit) => {
      if (url.endsWith("/events")) await gate;
      return backend.fetch(url, init);
    };
    const root = document.createElement("div");
    document.body.appendChild(root);
    const ui = await mountApp(root, {
      baseUrl: "http://test",
      userId: "u1",
      fetchFn: slowFetch,
      speaker: recordingSpeaker(),
      recognizer: silentRecognizer,
      subscribe: false,
    });
    mounted = ui;

    const send = root.querySelector("button.send") as HTMLButtonElement;
    ui.sendUtterance("first");
    expect(send.disabled).toBe(true);
    ui.sendUtterance("second"); // ignored while busy
    release();
    await ui.settle();
    expect(send.disabled).toBe(false);
    expect(backend.events).toEqual([{ kind: "utterance", text: "first" }]);
  });

  it("shows gateway errors as a banner without losing the view", async () => {
    const backend = fakeBackend();
    const { root, ui } = await mount(backend);
    backend.failNext = { status: 400, error: "unknown event kind 'nope'" };
    ui.sendUtterance("whatever");
    await ui.settle();
    const banner = root.querySelector(".banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.className).toContain("error");
    expect(banner.textContent).toContain("unknown event kind");
    expect(root.querySelectorAll(".tile")).toHaveLength(2); // old view still up
  });

  it("shows a schema-mismatch banner for unparseable documents", async () => {
    const backend = fakeBackend();
    const { root, ui } = await mount(backend);
    backend.nextDoc = { hello: "world" };
    ui.sendUtterance("menu");
    await ui.settle();
    const banner = root.querySelector(".banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("wire schema");
    expect(root.querySelector(".view-host")!.childNodes.length).toBeGreaterThan(0);
  });

  it("mute stops speech output until unmuted", async () => {
    const backend = fakeBackend();
    const speaker = recordingSpeaker();
    const { root, ui } = await mount(backend, speaker);
    (root.querySelector("button.mute") as HTMLButtonElement).click();
    ui.sendUtterance("menu");
    await ui.settle();
    expect(speaker.spoken).toHaveLength(1); // only the mount-time speech
    (root.querySelector("button.mute") as HTMLButtonElement).click();
    ui.sendUtterance("menu");
    await ui.settle();
    expect(speaker.spoken).toHaveLength(2);
  });

  it("adjusts the speaking rate from the slider", async () => {
    const backend = fakeBackend();
    const speaker = recordingSpeaker();
    const { root } = await mount(backend, speaker);
    const slider = root.querySelector("input.rate") as HTMLInputElement;
    slider.value = "0.8";
    slider.dispatchEvent(new Event("input", { bubbles: true }));
    expect(speaker.rate).toBeCloseTo(0.8);
  });
});

describe("speech input", () => {
  it("disables the mic when recognition is unavailable", async () => {
    const backend = fakeBackend();
    const { root } = await mount(backend);
    const mic = root.querySelector("button.mic") as HTMLButtonElement;
    expect(mic.disabled).toBe(true);
    expect(mic.title).toContain("not available");
  });

  it("sends recognized text as an utterance", async () => {
    const backend = fakeBackend();
    const recognizer: Recognizer = {
      available: true,
      start: (onText) => onText("main menu"),
      stop: () => {},
    };
    const { root, ui } = await mount(backend, recordingSpeaker(), recognizer);
    (root.querySelector("button.mic") as HTMLButtonElement).click();
    await ui.settle();
    expect(backend.events).toEqual([{ kind: "utterance", text: "main menu" }]);
    expect(root.querySelector(".line.you")!.textContent).toBe("main menu");
  });

  it("shows a retry hint on recognition errors and sends nothing", async () => {
    const backend = fakeBackend();
    const recognizer: Recognizer = {
      available: true,
      start: (_onText, onError) => onError("no-speech"),
      stop: () => {},
    };
    const { root, ui } = await mount(backend, recordingSpeaker(), recognizer);
    (root.querySelector("button.mic") as HTMLButtonElement).click();
    await ui.settle();
    const banner = root.querySelector(".banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("try again");
    expect(backend.events).toHaveLength(0);
  });
});

describe("survey", () => {
  it("submits the ten answers and shows the score", async () => {
    const backend = fakeBackend();
    const { root, ui } = await mount(backend);
    root
      .querySelector("form.sus-form")!
      .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await ui.settle();
    expect(backend.instrumentBodies).toEqual([{ answers: [3, 3, 3, 3, 3, 3, 3, 3, 3, 3] }]);
    expect(root.querySelector(".sus-result")!.textContent).toBe(
      "Usability score: 50 (below average)",
    );
  });
});

describe("notifications", () => {
  it("shows pushes as a banner without replacing the view", async () => {
    let push!: (chunk: string) => void;
    const backend = fakeBackend();
    const withStream = async (url: string, init?: RequestInit) => {
      if (url.includes("/api/notifications/")) {
        const encoder = new TextEncoder();
        const stream = new ReadableStream<Uint8Array>({
          start(controller) {
            push = (chunk) => controller.enqueue(encoder.encode(chunk));
          },
        });
        return new Response(stream, {
          status: 200,
          headers: { "content-type": "text/event-stream" },
        });
      }
      return backend.fetch(url, init);
    };
    const root = document.createElement("div");
    document.body.appendChild(root);
    const ui = await mountApp(root, {
      baseUrl: "http://test",
      userId: "u1",
      fetchFn: withStream,
      speaker: recordingSpeaker(),
      recognizer: silentRecognizer,
      subscribe: true,
    });
    mounted = ui;

    const doc = defaultDoc({ notification: true, body: "Good morning, Maria!" });
    push(`data: ${JSON.stringify(doc)}\n\n`);
    await new Promise((resolve) => setTimeout(resolve, 20));

    const banner = root.querySelector(".banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.className).toContain("notice");
    expect(banner.textContent).toBe("Good morning, Maria!");
    expect(root.querySelectorAll(".tile")).toHaveLength(2); // view untouched
  });
});
