import { describe, expect, it } from "vitest";

import { SLIDER_MAX, SLIDER_MIN, formatWeight, positionToValue, valueToPosition } from "../src/sliders.js";

describe("log slider mapping", () => {
  it("spans three decades each way", () => {
    expect(positionToValue(0)).toBeCloseTo(SLIDER_MIN, 12);
    expect(positionToValue(1)).toBeCloseTo(SLIDER_MAX, 9);
    expect(positionToValue(0.5)).toBeCloseTo(1, 12);
  });

  it("round-trips positions and values", () => {
    for (const p of [0, 0.1, 0.25, 0.5, 0.75, 0.9, 1]) {
      expect(valueToPosition(positionToValue(p))).toBeCloseTo(p, 10);
    }
    for (const v of [0.001, 0.02, 1, 38.5, 1000]) {
      expect(positionToValue(valueToPosition(v))).toBeCloseTo(v, 8);
    }
  });

  it("clamps out-of-range input", () => {
    expect(positionToValue(-0.5)).toBeCloseTo(SLIDER_MIN, 12);
    expect(positionToValue(2)).toBeCloseTo(SLIDER_MAX, 9);
    expect(valueToPosition(1e9)).toBe(1);
    expect(valueToPosition(0)).toBe(0);
    expect(valueToPosition(-3)).toBe(0);
  });

  it("formats readouts at three significant digits", () => {
    expect(formatWeight(0.001)).toBe("0.00100");
    expect(formatWeight(38.55)).toBe("38.5");
    expect(formatWeight(1000)).toBe("1000");
  });
});
