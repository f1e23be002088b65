// Pure view-model logic: everything here is a function of API responses and
// local input state, so identical inputs always produce identical screens.

import type { ItemRef, MetricsView, Task } from "./api.js";

// -- odd-one-out card selection ----------------------------------------------

export interface SelectionState {
  chosen: string[];
  need: number; // 2 for triples, 1 for pairs
}

export function emptySelection(need: number): SelectionState {
  return { chosen: [], need };
}

export function toggleCard(state: SelectionState, itemId: string): SelectionState {
  const chosen = state.chosen.includes(itemId)
    ? state.chosen.filter((id) => id !== itemId)
    : [...state.chosen, itemId];
  return { ...state, chosen };
}

export function canSubmitSelection(state: SelectionState, featureName: string): boolean {
  return state.chosen.length === state.need && featureName.trim().length > 0;
}

// -- label grid ----------------------------------------------------------------

export interface LabelGridState {
  // item id -> true/false once the worker touched it; untouched = unknown
  toggles: Map<string, boolean>;
}

export function emptyGrid(): LabelGridState {
  return { toggles: new Map() };
}

export function cycleToggle(state: LabelGridState, itemId: string): LabelGridState {
  const toggles = new Map(state.toggles);
  const current = toggles.get(itemId);
  if (current === undefined) {
    toggles.set(itemId, true);
  } else if (current) {
    toggles.set(itemId, false);
  } else {
    toggles.delete(itemId); // back to unknown
  }
  return { toggles };
}

export interface BitsResult {
  bits: string;
  missing: number; // untouched items defaulted to 0; >0 asks for confirmation
}

export function assembleBits(itemIds: string[], state: LabelGridState): BitsResult {
  let missing = 0;
  const bits = itemIds
    .map((id) => {
      const v = state.toggles.get(id);
      if (v === undefined) {
        missing += 1;
        return "0";
      }
      return v ? "1" : "0";
    })
    .join("");
  return { bits, missing };
}

// -- progress panel -------------------------------------------------------------

export interface CurvePoint {
  x: number;
  y: number;
}

/** Map a (k, g) curve onto SVG coordinates; g=1 at the top, g=0 at the bottom. */
export function curvePoints(
  curve: [number, number][],
  width: number,
  height: number,
): CurvePoint[] {
  if (curve.length === 0) {
    return [];
  }
  const maxK = Math.max(1, curve[curve.length - 1]![0]);
  return curve.map(([k, g]) => ({
    x: (k / maxK) * width,
    y: (1 - g) * height,
  }));
}

export function formatG(g: number): string {
  return g.toFixed(3);
}

// -- screen derivation ------------------------------------------------------------

export type Screen =
  | { kind: "elicit"; taskId: string; items: ItemRef[]; need: number }
  | { kind: "label"; taskId: string; feature: string; items: ItemRef[]; votesNeeded: number; votesHave: number }
  | { kind: "done"; reason: string };

export function screenFor(task: Task): Screen {
  if (task.kind === "done") {
    return { kind: "done", reason: task.reason };
  }
  if (task.kind === "label_batch") {
    return {
      kind: "label",
      taskId: task.task_id,
      feature: task.feature,
      items: task.items,
      votesNeeded: task.votes_needed,
      votesHave: task.votes_have,
    };
  }
  return {
    kind: "elicit",
    taskId: task.task_id,
    items: task.items,
    need: task.kind === "elicit_triple" ? 2 : 1,
  };
}

export function progressSummary(m: MetricsView): string {
  return `${m.features.length} features (${m.distinct_interesting} distinct) · g = ${formatG(m.g)} · ${m.elicitations} comparisons`;
}

// -- client configuration ----------------------------------------------------------

export interface ClientConfig {
  baseUrl: string;
  token: string | null;
  sessionId: string | null;
  voter: string;
  confirmNone: boolean;
}

/** Read configuration from URL query parameters; sensible single-worker defaults. */
export function configFromParams(params: URLSearchParams): ClientConfig {
  return {
    baseUrl: (params.get("base") ?? "").replace(/\/$/, ""),
    token: params.get("token"),
    sessionId: params.get("session"),
    voter: params.get("voter") ?? "operator",
    confirmNone: params.get("confirm_none") !== "off",
  };
}
