// Canvas rendering. The kymogram is drawn pixel-faithful: integer scale,
// nearest-neighbor, snaxel markers centered on their pixels. The geometry
// helpers are pure so they can be tested without a canvas.

import { PgmImage, toRgba } from "./pgm.js";

/** Largest integer scale that fits the image into the given box. */
export function fitScale(imgW: number, imgH: number, boxW: number, boxH: number): number {
  if (imgW <= 0 || imgH <= 0) return 1;
  return Math.max(1, Math.floor(Math.min(boxW / imgW, boxH / imgH)));
}

/** Canvas coordinates of snaxel centers at a given integer scale. */
export function snakePoints(
  snaxels: readonly [number, number][],
  scale: number,
): [number, number][] {
  return snaxels.map(([x, y]) => [x * scale + scale / 2, y * scale + scale / 2]);
}

/** Polyline for an energy trace inside a w-by-h box (y grows downward). */
export function sparklinePoints(values: readonly number[], w: number, h: number): [number, number][] {
  if (values.length === 0) return [];
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo;
  const dx = values.length > 1 ? w / (values.length - 1) : 0;
  return values.map((v, i) => {
    const t = span === 0 ? 0.5 : (v - lo) / span;
    return [i * dx, (1 - t) * (h - 2) + 1];
  });
}

export function renderKymogram(canvas: HTMLCanvasElement, img: PgmImage, scale: number): void {
  canvas.width = img.width * scale;
  canvas.height = img.height * scale;
  const ctx = canvas.getContext("2d")!;
  const off = document.createElement("canvas");
  off.width = img.width;
  off.height = img.height;
  off.getContext("2d")!.putImageData(new ImageData(toRgba(img), img.width, img.height), 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

export function drawPolyline(
  ctx: CanvasRenderingContext2D,
  points: readonly [number, number][],
  color: string,
  width = 2,
): void {
  if (points.length === 0) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  ctx.moveTo(points[0][0], points[0][1]);
  for (let i = 1; i < points.length; i++) ctx.lineTo(points[i][0], points[i][1]);
  ctx.stroke();
}

export function drawMidline(ctx: CanvasRenderingContext2D, row: number, scale: number, width: number): void {
  const y = row * scale + scale / 2;
  ctx.strokeStyle = "rgba(122, 162, 247, 0.8)";
  ctx.lineWidth = 1;
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(0, y);
  ctx.lineTo(width, y);
  ctx.stroke();
  ctx.setLineDash([]);
}

export function drawSparkline(
  canvas: HTMLCanvasElement,
  series: { label: string; values: number[] }[],
): void {
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const colors = ["#9ece6a", "#ff9e64", "#7aa2f7"];
  series.forEach((s, i) => {
    drawPolyline(ctx, sparklinePoints(s.values, canvas.width, canvas.height), colors[i % colors.length], 1.5);
  });
}
