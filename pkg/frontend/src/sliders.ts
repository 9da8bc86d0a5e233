// Log-scale slider mapping for the snake weights. Only parameter ratios
// matter to the optimizer (scaling all weights rescales every candidate
// energy identically), so the useful range spans several decades.

export const SLIDER_MIN = 1e-3;
export const SLIDER_MAX = 1e3;

const DECADES = Math.log10(SLIDER_MAX) - Math.log10(SLIDER_MIN);

/** Slider position in [0, 1] to a weight in [1e-3, 1e3]. */
export function positionToValue(position: number): number {
  const p = Math.min(1, Math.max(0, position));
  return 10 ** (Math.log10(SLIDER_MIN) + p * DECADES);
}

/** Weight to slider position, clamping values outside the span. */
export function valueToPosition(value: number): number {
  if (!(value > 0)) return 0;
  const p = (Math.log10(value) - Math.log10(SLIDER_MIN)) / DECADES;
  return Math.min(1, Math.max(0, p));
}

/** Compact readout for a weight: three significant digits. */
export function formatWeight(value: number): string {
  if (value >= 100) return value.toFixed(0);
  return value.toPrecision(3);
}
