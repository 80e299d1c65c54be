// Rolling score chart on a canvas: score polyline, threshold rule,
// alert markers. No chart library; the shape is a simple time series.

import type { ScorePoint } from "./state.js";

const MARGIN = { top: 8, right: 8, bottom: 18, left: 30 };

export function renderScoreChart(
  canvas: HTMLCanvasElement,
  scores: ScorePoint[],
  threshold: number,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  const plotW = w - MARGIN.left - MARGIN.right;
  const plotH = h - MARGIN.top - MARGIN.bottom;
  ctx.clearRect(0, 0, w, h);

  ctx.fillStyle = "#14161a";
  ctx.fillRect(MARGIN.left, MARGIN.top, plotW, plotH);

  const y = (v: number) => MARGIN.top + (1 - v) * plotH;
  const x = (i: number) =>
    MARGIN.left + (scores.length <= 1 ? plotW : (i / (scores.length - 1)) * plotW);

  ctx.strokeStyle = "#3a3f47";
  ctx.fillStyle = "#9aa3ad";
  ctx.font = "10px sans-serif";
  for (const grid of [0, 0.25, 0.5, 0.75, 1]) {
    ctx.beginPath();
    ctx.moveTo(MARGIN.left, y(grid));
    ctx.lineTo(w - MARGIN.right, y(grid));
    ctx.stroke();
    ctx.fillText(grid.toFixed(2), 2, y(grid) + 3);
  }

  // threshold rule
  ctx.strokeStyle = "#e4572e";
  ctx.setLineDash([5, 4]);
  ctx.beginPath();
  ctx.moveTo(MARGIN.left, y(threshold));
  ctx.lineTo(w - MARGIN.right, y(threshold));
  ctx.stroke();
  ctx.setLineDash([]);

  if (scores.length === 0) return;

  ctx.strokeStyle = "#4fc3f7";
  ctx.lineWidth = 2;
  ctx.beginPath();
  scores.forEach((p, i) => {
    if (i === 0) ctx.moveTo(x(i), y(p.score));
    else ctx.lineTo(x(i), y(p.score));
  });
  ctx.stroke();
  ctx.lineWidth = 1;

  scores.forEach((p, i) => {
    if (p.alert) {
      ctx.fillStyle = "#e4572e";
      ctx.beginPath();
      ctx.arc(x(i), y(p.score), 4, 0, Math.PI * 2);
      ctx.fill();
    }
  });
}
