/**
 * Pure DOM factories: one renderer per template kind. Nothing here talks to
 * the network; interactions are reported through the RenderHandlers.
 */

import { ResponseDoc } from "./types.js";
import { createWheel } from "./wheel.js";

export interface RenderHandlers {
  onIntent?: (intent: string, label: string) => void;
  onCheckboxSubmit?: (tags: string[]) => void;
  onEmotion?: (sector: string, intensity: string) => void;
}

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

function renderBodyText(body: string): HTMLElement {
  const wrap = el("div", "body-text");
  for (const paragraph of body.split("\n\n")) {
    if (paragraph.trim()) wrap.appendChild(el("p", undefined, paragraph));
  }
  return wrap;
}

function renderSlides(doc: ResponseDoc & { template: "slides" }): HTMLElement {
  const strip = el("div", "slides");
  for (const box of doc.template_data.boxes) {
    const slide = el("article", "slide");
    slide.appendChild(el("h3", undefined, box.title));
    slide.appendChild(renderBodyText(box.body));
    strip.appendChild(slide);
  }
  return strip;
}

function renderCheckboxes(
  doc: ResponseDoc & { template: "checkboxes" },
  handlers: RenderHandlers,
): HTMLElement {
  const form = el("form", "checklist");
  for (const option of doc.template_data.options) {
    const row = el("label", "check-row");
    const input = el("input");
    input.type = "checkbox";
    input.checked = option.checked;
    input.dataset.tag = option.tag;
    row.appendChild(input);
    row.appendChild(el("span", undefined, option.label));
    form.appendChild(row);
  }
  const submit = el("button", "submit", doc.template_data.submit_label);
  submit.type = "submit";
  form.appendChild(submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const tags: string[] = [];
    form.querySelectorAll<HTMLInputElement>("input[type=checkbox]").forEach((input) => {
      if (input.checked && input.dataset.tag) tags.push(input.dataset.tag);
    });
    if (handlers.onCheckboxSubmit) handlers.onCheckboxSubmit(tags);
  });
  return form;
}

function renderDashboard(
  doc: ResponseDoc & { template: "dashboard" },
  handlers: RenderHandlers,
): HTMLElement {
  const wrap = el("section", "dashboard");
  for (const tile of doc.template_data.tiles) {
    const card = el("article", "tile");
    card.dataset.tile = tile.id;
    card.appendChild(el("h3", undefined, tile.title));
    card.appendChild(el("p", undefined, tile.text));
    wrap.appendChild(card);
  }
  const cta = doc.template_data.cta;
  if (cta) {
    const button = el("button", "cta", cta.label);
    button.type = "button";
    button.dataset.intent = cta.intent;
    button.addEventListener("click", () => {
      if (handlers.onIntent) handlers.onIntent(cta.intent, cta.label);
    });
    wrap.appendChild(button);
  }
  return wrap;
}

function renderButtons(doc: ResponseDoc, handlers: RenderHandlers): HTMLElement | null {
  if (!doc.buttons.length) return null;
  const row = el("div", "suggestions");
  for (const spec of doc.buttons) {
    const button = el("button", "suggestion", spec.label);
    button.type = "button";
    button.dataset.intent = spec.intent;
    button.addEventListener("click", () => {
      if (handlers.onIntent) handlers.onIntent(spec.intent, spec.label);
    });
    row.appendChild(button);
  }
  return row;
}

/** Build the full view for one payload; never returns an empty element. */
export function renderDocument(doc: ResponseDoc, handlers: RenderHandlers = {}): HTMLElement {
  const view = el("section", `view template-${doc.template}`);
  if (doc.header) view.appendChild(el("h2", "view-header", doc.header));
  if (doc.body) view.appendChild(renderBodyText(doc.body));
  if (doc.html_frame) {
    const frame = el("div", "wire-frame");
    frame.innerHTML = doc.html_frame; // server-authored fragment
    view.appendChild(frame);
  }

  if (doc.template === "slides") {
    view.appendChild(renderSlides(doc));
  } else if (doc.template === "checkboxes") {
    view.appendChild(renderCheckboxes(doc, handlers));
  } else if (doc.template === "emotions") {
    view.appendChild(
      createWheel(doc.template_data.cells, (selected) => {
        if (handlers.onEmotion) handlers.onEmotion(selected.sector, selected.intensity);
      }),
    );
  } else if (doc.template === "dashboard") {
    view.appendChild(renderDashboard(doc, handlers));
  }

  const buttons = renderButtons(doc, handlers);
  if (buttons) view.appendChild(buttons);
  return view;
}

/** Visible failure card; shown instead of a blank screen. */
export function renderErrorCard(message: string): HTMLElement {
  const card = el("article", "error-card", message);
  card.setAttribute("role", "alert");
  return card;
}
