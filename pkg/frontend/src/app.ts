/**
 * Screen assembly and event routing. One session per mount, one in-flight
 * request at a time; every user interaction cancels running speech first.
 */

import { ApiError, GatewayClient, NotificationStream } from "./api.js";
import { renderDocument, renderErrorCard } from "./render.js";
import { createRecognizer, createSpeaker, Recognizer, Speaker } from "./speech.js";
import {
  buttonEvent,
  checkboxEvent,
  emotionEvent,
  EventDoc,
  ResponseDoc,
  utteranceEvent,
} from "./types.js";

export interface AppOptions {
  baseUrl?: string;
  userId: string;
  name?: string;
  gender?: string;
  fetchFn?: (input: string, init?: RequestInit) => Promise<Response>;
  speaker?: Speaker;
  recognizer?: Recognizer;
  subscribe?: boolean;
}

export interface AppController {
  readonly client: GatewayClient;
  readonly sessionId: string;
  readonly root: HTMLElement;
  currentDoc(): ResponseDoc | null;
  sendUtterance(text: string): void;
  settle(): Promise<void>;
  dispose(): void;
}

const SUS_ITEMS = [
  "I think that I would like to use Willa frequently.",
  "I found Willa unnecessarily complex.",
  "I thought Willa was easy to use.",
  "I think that I would need the support of a technical person to be able to use Willa.",
  "I found the various functions in Willa were well integrated.",
  "I thought there was too much inconsistency in Willa.",
  "I would imagine that most people would learn to use Willa very quickly.",
  "I found Willa very cumbersome to use.",
  "I felt very confident using Willa.",
  "I needed to learn a lot of things before I could get going with Willa.",
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export async function mountApp(root: HTMLElement, options: AppOptions): Promise<AppController> {
  const client = new GatewayClient(options.baseUrl ?? "", options.fetchFn);
  const speaker = options.speaker ?? createSpeaker();
  const recognizer = options.recognizer ?? createRecognizer();

  root.textContent = "";
  root.classList.add("wellbot");

  const header = el("header", "top-bar");
  header.appendChild(el("h1", "brand", "Willa"));
  const muteButton = el("button", "mute", "Sound on");
  muteButton.type = "button";
  header.appendChild(muteButton);
  const rateLabel = el("label", "rate-label", "Voice speed");
  const rateSlider = el("input", "rate");
  rateSlider.type = "range";
  rateSlider.min = "0.6";
  rateSlider.max = "1.4";
  rateSlider.step = "0.1";
  rateSlider.value = "1";
  rateLabel.appendChild(rateSlider);
  header.appendChild(rateLabel);
  root.appendChild(header);

  const banner = el("div", "banner");
  banner.hidden = true;
  banner.setAttribute("role", "status");
  root.appendChild(banner);

  const transcript = el("div", "transcript");
  transcript.setAttribute("aria-live", "polite");
  root.appendChild(transcript);

  const viewHost = el("div", "view-host");
  root.appendChild(viewHost);

  const composer = el("form", "composer");
  const input = el("input", "say-box");
  input.type = "text";
  input.placeholder = "Type or say something...";
  const sendButton = el("button", "send", "Send");
  sendButton.type = "submit";
  const micButton = el("button", "mic", "Speak");
  micButton.type = "button";
  composer.appendChild(input);
  composer.appendChild(sendButton);
  composer.appendChild(micButton);
  root.appendChild(composer);

  const survey = document.createElement("details");
  survey.className = "survey";
  const summary = el("summary", undefined, "How was this session?");
  survey.appendChild(summary);
  const susForm = el("form", "sus-form");
  SUS_ITEMS.forEach((item, index) => {
    const row = el("label", "sus-row");
    row.appendChild(el("span", undefined, item));
    const pick = el("select", "sus-answer");
    pick.dataset.item = String(index + 1);
    for (let value = 1; value <= 5; value++) {
      const option = el("option", undefined, String(value));
      option.value = String(value);
      if (value === 3) option.selected = true;
      pick.appendChild(option);
    }
    row.appendChild(pick);
    susForm.appendChild(row);
  });
  const susSubmit = el("button", "sus-submit", "Send feedback");
  susSubmit.type = "submit";
  susForm.appendChild(susSubmit);
  const susResult = el("p", "sus-result", "");
  susForm.appendChild(susResult);
  survey.appendChild(susForm);
  root.appendChild(survey);

  let muted = false;
  let busy = false;
  let inflight: Promise<void> = Promise.resolve();
  let current: ResponseDoc | null = null;
  let stream: NotificationStream | null = null;

  function showBanner(kind: "notice" | "error", text: string): void {
    banner.className = `banner ${kind}`;
    banner.textContent = text;
    banner.hidden = false;
  }

  function addLine(who: "you" | "bot", text: string): void {
    if (!text) return;
    transcript.appendChild(el("div", `line ${who}`, text));
  }

  function setBusy(value: boolean): void {
    busy = value;
    sendButton.disabled = value;
    viewHost
      .querySelectorAll<HTMLButtonElement>("button")
      .forEach((button) => (button.disabled = value));
  }

  function showDoc(doc: ResponseDoc): void {
    current = doc;
    const botText = doc.header ? `${doc.header} ${doc.body}`.trim() : doc.body;
    addLine("bot", botText);
    viewHost.textContent = "";
    viewHost.appendChild(
      renderDocument(doc, {
        onIntent: (intent, label) => submitEvent(buttonEvent(intent), label),
        onCheckboxSubmit: (tags) => submitEvent(checkboxEvent(tags), tags.join(", ")),
        onEmotion: (sector, intensity) =>
          submitEvent(emotionEvent(sector, intensity), `${intensity} ${sector}`),
      }),
    );
    if (!muted) speaker.speak(doc.speak);
  }

  function showFailure(error: unknown): void {
    const message = error instanceof Error ? error.message : String(error);
    showBanner("error", message);
    if (!current) {
      viewHost.textContent = "";
      viewHost.appendChild(renderErrorCard(message));
    }
  }

  function submitEvent(event: EventDoc, echo: string): void {
    if (busy) return;
    speaker.cancel();
    addLine("you", echo);
    setBusy(true);
    inflight = client
      .postEvent(controller.sessionId, event)
      .then(showDoc)
      .catch(showFailure)
      .finally(() => setBusy(false));
  }

  muteButton.addEventListener("click", () => {
    muted = !muted;
    muteButton.textContent = muted ? "Sound off" : "Sound on";
    if (muted) speaker.cancel();
  });

  rateSlider.addEventListener("input", () => {
    speaker.rate = Number(rateSlider.value) || 1;
  });

  composer.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (!text) return;
    input.value = "";
    submitEvent(utteranceEvent(text), text);
  });

  if (!recognizer.available) {
    micButton.disabled = true;
    micButton.title = "Speech input is not available on this device.";
  }
  micButton.addEventListener("click", () => {
    speaker.cancel();
    recognizer.start(
      (text) => {
        input.value = text; // show the recognition before it is sent
        submitEvent(utteranceEvent(text), text);
        input.value = "";
      },
      (reason) => showBanner("error", `I did not catch that (${reason}). Please try again.`),
    );
  });

  susForm.addEventListener("submit", (event) => {
    event.preventDefault();
    if (busy) return;
    const answers: number[] = [];
    susForm
      .querySelectorAll<HTMLSelectElement>("select.sus-answer")
      .forEach((pick) => answers.push(Number(pick.value)));
    setBusy(true);
    inflight = client
      .submitInstrument(controller.sessionId, "sus", { answers })
      .then((result) => {
        const grade = String(result.grade ?? "").replace("_", " ");
        susResult.textContent = `Usability score: ${result.score} (${grade})`;
      })
      .catch(showFailure)
      .finally(() => setBusy(false));
  });

  const controller: AppController = {
    client,
    sessionId: "",
    root,
    currentDoc: () => current,
    sendUtterance: (text) => submitEvent(utteranceEvent(text), text),
    settle: async () => {
      for (let round = 0; round < 1000; round++) {
        await inflight;
        await new Promise((resolve) => setTimeout(resolve, 0));
        if (!busy) return;
      }
    },
    dispose: () => {
      if (stream) stream.close();
      speaker.cancel();
      recognizer.stop();
    },
  };

  setBusy(true);
  try {
    const created = await client.createSession(options.userId, options.name, options.gender);
    (controller as { sessionId: string }).sessionId = created.sessionId;
    showDoc(created.response);
  } catch (error) {
    showFailure(error);
    throw error;
  } finally {
    setBusy(false);
  }

  if (options.subscribe !== false) {
    stream = client.openNotifications(
      controller.sessionId,
      (doc) => showBanner("notice", doc.body), // never replaces the view
      () => {
        /* lost push channel; the app keeps working without it */
      },
    );
  }

  return controller;
}
