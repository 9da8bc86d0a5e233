// Steering state and its pure transitions. Nothing here talks to the
// network or the DOM; the controller applies these transitions and the view
// renders whatever state says. History is an append-only tree: entries are
// frozen on insertion and branching adds children, it never rewrites.

import { DeformResponse, GroundTruth, SnakeParamsJson } from "./api.js";

export interface Weights {
  alpha: number;
  beta: number;
  gamma: number;
}

export type IterationMode = "converge" | "step";

export interface HistoryEntry {
  /** Index of this entry in the history array. */
  readonly id: number;
  /** Entry this deformation continued from, or null for a fresh start. */
  readonly parent: number | null;
  readonly params: SnakeParamsJson;
  readonly stepMode: boolean;
  readonly response: DeformResponse;
}

export interface Overlays {
  snake: boolean;
  groundTruth: boolean;
  trace: boolean;
}

export interface SteeringState {
  readonly sessionId: string | null;
  readonly imageB64: string | null;
  readonly imageWidth: number;
  readonly imageHeight: number;
  readonly groundTruth: GroundTruth | null;
  readonly vstring: string | null;
  readonly midline: number | null;
  readonly bandHalfwidth: number;
  readonly weights: Weights;
  readonly mode: IterationMode;
  readonly overlays: Overlays;
  readonly history: readonly HistoryEntry[];
  /** Selected entry; null means "no deformation yet". */
  readonly cursor: number | null;
  readonly pending: boolean;
  readonly banner: string | null;
}

export function initialState(): SteeringState {
  return {
    sessionId: null,
    imageB64: null,
    imageWidth: 0,
    imageHeight: 0,
    groundTruth: null,
    vstring: null,
    midline: null,
    bandHalfwidth: 14,
    weights: { alpha: 1, beta: 1, gamma: 1 },
    mode: "step",
    overlays: { snake: true, groundTruth: false, trace: true },
    history: [],
    cursor: null,
    pending: false,
    banner: null,
  };
}

export function setWeight(state: SteeringState, name: keyof Weights, value: number): SteeringState {
  if (!(value >= 0)) throw new Error(`${name} must be >= 0, got ${value}`);
  return { ...state, weights: { ...state.weights, [name]: value } };
}

export function setCursor(state: SteeringState, cursor: number | null): SteeringState {
  if (cursor !== null && (cursor < 0 || cursor >= state.history.length)) {
    throw new Error(`history cursor ${cursor} out of range`);
  }
  return { ...state, cursor };
}

/** Appends a frozen entry and moves the cursor onto it. */
export function appendEntry(
  state: SteeringState,
  entry: Omit<HistoryEntry, "id">,
): SteeringState {
  const frozen = Object.freeze({ ...entry, id: state.history.length });
  return { ...state, history: [...state.history, frozen], cursor: frozen.id };
}

/** The chain of entries from the root to `id`, oldest first. */
export function lineage(state: SteeringState, id: number): HistoryEntry[] {
  const chain: HistoryEntry[] = [];
  let at: number | null = id;
  while (at !== null) {
    const entry: HistoryEntry = state.history[at];
    chain.push(entry);
    at = entry.parent;
  }
  return chain.reverse();
}

/**
 * Energy samples to plot for the current cursor: per-edge traces of every
 * entry along the lineage, concatenated in execution order.
 */
export function lineageTraces(state: SteeringState): { label: string; values: number[] }[] {
  if (state.cursor === null) return [];
  const chain = lineage(state, state.cursor);
  const series = new Map<string, number[]>();
  for (const entry of chain) {
    const r = entry.response;
    if ("midline" in r) {
      series.set("upper", [...(series.get("upper") ?? []), ...r.upper.trace]);
      series.set("lower", [...(series.get("lower") ?? []), ...r.lower.trace]);
    } else {
      series.set("snake", [...(series.get("snake") ?? []), ...r.trace]);
    }
  }
  return [...series.entries()].map(([label, values]) => ({ label, values }));
}
