import { describe, expect, it } from "vitest";

import { DeformResultJson, PairDeformResponse } from "../src/api.js";
import {
  appendEntry,
  initialState,
  lineage,
  lineageTraces,
  setCursor,
  setWeight,
} from "../src/state.js";

function freeResult(trace: number[]): DeformResultJson {
  return {
    snake: { closed: false, snaxels: [[0, 0], [1, 0], [2, 0]] },
    trace,
    iterations: trace.length,
    converged: false,
  };
}

function pairResult(upper: number[], lower: number[]): PairDeformResponse {
  return { midline: 5, upper: freeResult(upper), lower: freeResult(lower) };
}

describe("steering state", () => {
  it("rejects negative weights", () => {
    expect(() => setWeight(initialState(), "alpha", -1)).toThrow(/>= 0/);
    expect(setWeight(initialState(), "beta", 0).weights.beta).toBe(0);
  });

  it("bounds the history cursor", () => {
    const empty = initialState();
    expect(() => setCursor(empty, 0)).toThrow(/out of range/);
    expect(setCursor(empty, null).cursor).toBeNull();

    const one = appendEntry(empty, {
      parent: null,
      params: {},
      stepMode: true,
      response: freeResult([3]),
    });
    expect(one.cursor).toBe(0);
    expect(() => setCursor(one, 1)).toThrow(/out of range/);
  });

  it("appends frozen entries without touching earlier ones", () => {
    let state = initialState();
    state = appendEntry(state, { parent: null, params: {}, stepMode: true, response: freeResult([9]) });
    const firstRef = state.history[0];
    state = appendEntry(state, { parent: 0, params: {}, stepMode: true, response: freeResult([8]) });
    expect(state.history[0]).toBe(firstRef);
    expect(Object.isFrozen(state.history[1])).toBe(true);
    expect(state.history.map((e) => e.id)).toEqual([0, 1]);
  });

  it("walks lineages through branches", () => {
    let state = initialState();
    state = appendEntry(state, { parent: null, params: {}, stepMode: true, response: freeResult([9]) });
    state = appendEntry(state, { parent: 0, params: {}, stepMode: true, response: freeResult([8]) });
    state = appendEntry(state, { parent: 0, params: {}, stepMode: true, response: freeResult([7]) });

    expect(lineage(state, 1).map((e) => e.id)).toEqual([0, 1]);
    expect(lineage(state, 2).map((e) => e.id)).toEqual([0, 2]);
  });

  it("concatenates lineage traces per edge", () => {
    let state = initialState();
    state = appendEntry(state, {
      parent: null, params: {}, stepMode: true, response: pairResult([10], [11]),
    });
    state = appendEntry(state, {
      parent: 0, params: {}, stepMode: false, response: pairResult([9, 8], [10, 10]),
    });

    const series = lineageTraces(state);
    expect(series).toEqual([
      { label: "upper", values: [10, 9, 8] },
      { label: "lower", values: [11, 10, 10] },
    ]);
  });

  it("yields no traces before any deformation", () => {
    expect(lineageTraces(initialState())).toEqual([]);
  });
});
