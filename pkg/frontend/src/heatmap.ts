// Heatmap rendering: a fixed perceptual color ramp over the 32x32
// aggregate grid. Intensity is normalized per frame to the busiest cell.

import type { HeatmapPayload } from "./types.js";

// viridis-style anchors, dark-to-bright; perceptually ordered so hotter
// cells always read as brighter
const RAMP: [number, number, number][] = [
  [68, 1, 84],
  [59, 82, 139],
  [33, 145, 140],
  [94, 201, 98],
  [253, 231, 37],
];

export function rampColor(t: number): [number, number, number] {
  const clamped = Math.min(Math.max(t, 0), 1);
  const scaled = clamped * (RAMP.length - 1);
  const i = Math.min(Math.floor(scaled), RAMP.length - 2);
  const f = scaled - i;
  const [r0, g0, b0] = RAMP[i];
  const [r1, g1, b1] = RAMP[i + 1];
  return [
    Math.round(r0 + (r1 - r0) * f),
    Math.round(g0 + (g1 - g0) * f),
    Math.round(b0 + (b1 - b0) * f),
  ];
}

export function renderHeatmap(canvas: HTMLCanvasElement, grid: HeatmapPayload): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { rows, cols, counts } = grid;
  const cellW = canvas.width / cols;
  const cellH = canvas.height / rows;
  let max = 0;
  for (const c of counts) if (c > max) max = c;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      const count = counts[r * cols + c];
      const [red, green, blue] = rampColor(max > 0 ? count / max : 0);
      ctx.fillStyle = `rgb(${red},${green},${blue})`;
      ctx.fillRect(c * cellW, r * cellH, Math.ceil(cellW), Math.ceil(cellH));
    }
  }
}
