// DOM composition: binds the client's event stream to the state reducer
// and repaints score chart, heatmap, banner, and status line per event.

import { InstructorClient, type ClientOptions } from "./client.js";
import { renderScoreChart } from "./chart.js";
import { renderHeatmap } from "./heatmap.js";
import {
  applyConnection,
  applySummary,
  applyThresholdAck,
  applyThresholdEdit,
  applyWindow,
  initialState,
  isValidThreshold,
  type DashboardState,
} from "./state.js";
import type { InstructorMsg } from "./types.js";

export interface Dashboard {
  client: InstructorClient;
  state(): DashboardState;
  root: HTMLElement;
  destroy(): void;
}

const STATUS_LABEL: Record<DashboardState["connection"], string> = {
  connecting: "connecting…",
  live: "live",
  reconnecting: "reconnecting…",
  auth_failed: "authorization failed — check the instructor key",
  closed: "session closed",
};

export function mountDashboard(root: HTMLElement, opts: ClientOptions): Dashboard {
  root.innerHTML = `
    <div class="cg-status" data-role="status"></div>
    <div class="cg-banner" data-role="banner" hidden>LOW CLASS ATTENTION</div>
    <div class="cg-meta" data-role="meta"></div>
    <canvas data-role="chart" width="640" height="220"></canvas>
    <canvas data-role="heatmap" width="320" height="320"></canvas>
    <label class="cg-threshold">
      alert threshold
      <input data-role="threshold" type="number" min="0.01" max="0.99" step="0.05" />
      <button data-role="apply">apply</button>
      <span data-role="threshold-note"></span>
    </label>
  `;
  const el = <T extends HTMLElement>(role: string) =>
    root.querySelector(`[data-role="${role}"]`) as T;
  const status = el<HTMLDivElement>("status");
  const banner = el<HTMLDivElement>("banner");
  const meta = el<HTMLDivElement>("meta");
  const chart = el<HTMLCanvasElement>("chart");
  const heatmap = el<HTMLCanvasElement>("heatmap");
  const thresholdInput = el<HTMLInputElement>("threshold");
  const applyButton = el<HTMLButtonElement>("apply");
  const thresholdNote = el<HTMLSpanElement>("threshold-note");

  let state = initialState();
  thresholdInput.value = String(state.threshold);

  function paint(): void {
    status.textContent = STATUS_LABEL[state.connection];
    status.dataset.connection = state.connection;
    banner.hidden = !state.alertActive;
    renderScoreChart(chart, state.scores, state.threshold);
    if (state.latest) {
      renderHeatmap(heatmap, state.latest.heatmap);
      meta.textContent =
        `window ${state.latest.start_ms}–${state.latest.end_ms} ms · ` +
        `score ${state.latest.score.toFixed(3)} · ` +
        `${state.latest.n_points} points · ${state.latest.n_clusters} cluster(s)` +
        (state.latest.auto_scaled ? " · small-window scaling" : "") +
        (state.latest.error ? " · degraded" : "");
    }
    thresholdNote.textContent =
      state.pendingThreshold !== null ? `applying ${state.pendingThreshold}…` : "";
    if (state.pendingThreshold === null && document.activeElement !== thresholdInput) {
      thresholdInput.value = String(state.threshold);
    }
  }

  const client = new InstructorClient(opts);
  client.on("status", (connection) => {
    state = applyConnection(state, connection);
    paint();
  });
  client.on("summary", (summary) => {
    state = applySummary(state, summary);
    paint();
  });
  client.on("message", (msg: InstructorMsg) => {
    if (msg.type === "window") state = applyWindow(state, msg);
    else if (msg.type === "threshold") state = applyThresholdAck(state, msg);
    else return paint();
    paint();
  });

  function submitThreshold(): void {
    const value = Number(thresholdInput.value);
    if (!isValidThreshold(value)) {
      thresholdNote.textContent = "threshold must be between 0 and 1 (exclusive)";
      return;
    }
    state = applyThresholdEdit(state, value);
    client.setThreshold(value);
    paint();
  }
  applyButton.addEventListener("click", submitThreshold);
  thresholdInput.addEventListener("keydown", (ev) => {
    if ((ev as KeyboardEvent).key === "Enter") submitThreshold();
  });

  paint();
  client.start();
  return {
    client,
    root,
    state: () => state,
    destroy: () => client.stop(),
  };
}
