// DOM construction for the three screens. Rendering is a pure function of
// the view model plus the handlers wired into it; no API state lives here.

import type { ItemRef } from "./api.js";
import type { Screen } from "./viewmodel.js";
import {
  LabelGridState,
  SelectionState,
  assembleBits,
  canSubmitSelection,
} from "./viewmodel.js";

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

/** Render one item by kind only: img, video, or a text block. */
export function mediaNode(item: ItemRef): HTMLElement {
  if (item.kind === "image") {
    const img = el("img", "media");
    img.src = item.media;
    img.alt = item.id;
    return img;
  }
  if (item.kind === "video") {
    const video = el("video", "media");
    video.src = item.media;
    video.muted = true;
    video.loop = true;
    video.autoplay = true;
    return video;
  }
  const block = el("div", "media media-text");
  block.textContent = item.media;
  return block;
}

export interface ElicitHandlers {
  onToggle: (itemId: string) => void;
  onSubmit: (featureName: string) => void;
  onNone: () => void;
}

export function renderElicit(
  root: HTMLElement,
  screen: Extract<Screen, { kind: "elicit" }>,
  selection: SelectionState,
  featureName: string,
  busy: boolean,
  error: string | null,
  handlers: ElicitHandlers,
): void {
  root.replaceChildren();
  const heading =
    screen.need === 2
      ? "Pick the two that share a feature, and name it"
      : "Pick the one that has a feature the other lacks, and name it";
  root.append(el("h2", "prompt", heading));

  const row = el("div", "cards");
  for (const item of screen.items) {
    const card = el("button", "card");
    card.type = "button";
    card.disabled = busy;
    if (selection.chosen.includes(item.id)) card.classList.add("selected");
    card.append(mediaNode(item), el("div", "card-id", item.id));
    card.addEventListener("click", () => handlers.onToggle(item.id));
    row.append(card);
  }
  root.append(row);

  const form = el("div", "controls");
  const input = el("input", "feature-name") as HTMLInputElement;
  input.placeholder = "feature name, e.g. wearing glasses";
  input.value = featureName;
  input.disabled = busy;
  const submit = el("button", "submit", "Submit feature") as HTMLButtonElement;
  submit.disabled = busy || !canSubmitSelection(selection, featureName);
  input.addEventListener("input", () => {
    submit.disabled = busy || !canSubmitSelection(selection, input.value);
  });
  submit.addEventListener("click", () => handlers.onSubmit(input.value));
  const none = el("button", "none", "Can't find one") as HTMLButtonElement;
  none.disabled = busy;
  none.addEventListener("click", handlers.onNone);
  form.append(input, submit, none);
  root.append(form);
  if (error) root.append(el("div", "error", error));
}

export interface LabelHandlers {
  onToggle: (itemId: string) => void;
  onSubmit: () => void;
}

export function renderLabelGrid(
  root: HTMLElement,
  screen: Extract<Screen, { kind: "label" }>,
  grid: LabelGridState,
  busy: boolean,
  error: string | null,
  handlers: LabelHandlers,
): void {
  root.replaceChildren();
  root.append(
    el("h2", "prompt", `Which items have “${screen.feature}”?`),
    el(
      "div",
      "hint",
      `tap: has it · tap again: doesn't · tap again: unknown — vote ${screen.votesHave + 1} of ${screen.votesNeeded}`,
    ),
  );
  const gridNode = el("div", "grid");
  for (const item of screen.items) {
    const cell = el("button", "cell");
    cell.type = "button";
    cell.disabled = busy;
    const state = grid.toggles.get(item.id);
    cell.classList.add(state === undefined ? "unknown" : state ? "yes" : "no");
    cell.append(mediaNode(item), el("div", "cell-id", item.id));
    cell.addEventListener("click", () => handlers.onToggle(item.id));
    gridNode.append(cell);
  }
  root.append(gridNode);
  const { missing } = assembleBits(
    screen.items.map((i) => i.id),
    grid,
  );
  const submit = el("button", "submit", "Submit labels") as HTMLButtonElement;
  submit.disabled = busy;
  submit.addEventListener("click", handlers.onSubmit);
  root.append(submit);
  if (missing > 0) {
    root.append(el("div", "hint", `${missing} unmarked item(s) will count as "doesn't"`));
  }
  if (error) root.append(el("div", "error", error));
}

export function renderDone(
  root: HTMLElement,
  reason: string,
  exportUrl: string,
): void {
  root.replaceChildren(
    el("h2", "prompt", "Session complete"),
    el("div", "hint", `stopped: ${reason}`),
  );
  const link = el("a", "export-link", "Download results (features + labels + transcript)");
  (link as HTMLAnchorElement).href = exportUrl;
  root.append(link);
}

export function renderStatus(root: HTMLElement, message: string): void {
  root.replaceChildren(el("div", "status", message));
}
