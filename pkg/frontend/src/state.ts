// Dashboard state: a pure reducer over instructor-channel messages.
// All transitions are synchronous and side-effect free so they can be
// unit tested without a DOM or a socket.

import type {
  ConnectionStatus,
  SessionSummary,
  SummaryScore,
  ThresholdMsg,
  WindowEventMsg,
} from "./types.js";

export const SCORE_RING_SIZE = 150;

export interface ScorePoint {
  startMs: number;
  endMs: number;
  score: number;
  nPoints: number;
  nClusters: number;
  alert: boolean;
  error: boolean;
}

export interface DashboardState {
  connection: ConnectionStatus;
  scores: ScorePoint[]; // ring of the most recent windows, oldest first
  latest: WindowEventMsg | null; // source of the current heatmap
  threshold: number; // last server-acknowledged value
  pendingThreshold: number | null; // optimistic edit awaiting ack
  alertActive: boolean; // banner state
  lastAlert: ScorePoint | null;
  windowsReceived: number;
}

export function initialState(): DashboardState {
  return {
    connection: "connecting",
    scores: [],
    latest: null,
    threshold: 0.5,
    pendingThreshold: null,
    alertActive: false,
    lastAlert: null,
    windowsReceived: 0,
  };
}

function pushScore(scores: ScorePoint[], point: ScorePoint): ScorePoint[] {
  const next = scores.concat(point);
  return next.length > SCORE_RING_SIZE ? next.slice(next.length - SCORE_RING_SIZE) : next;
}

export function applyWindow(state: DashboardState, msg: WindowEventMsg): DashboardState {
  const point: ScorePoint = {
    startMs: msg.start_ms,
    endMs: msg.end_ms,
    score: msg.score,
    nPoints: msg.n_points,
    nClusters: msg.n_clusters,
    alert: msg.alert,
    error: msg.error,
  };
  // the banner latches on an alert event and clears once the class
  // recovers to at or above the threshold
  const recovered = msg.score >= state.threshold;
  return {
    ...state,
    scores: pushScore(state.scores, point),
    latest: msg,
    alertActive: msg.alert ? true : state.alertActive && !recovered,
    lastAlert: msg.alert ? point : state.lastAlert,
    windowsReceived: state.windowsReceived + 1,
  };
}

export function applyThresholdAck(state: DashboardState, msg: ThresholdMsg): DashboardState {
  return { ...state, threshold: msg.value, pendingThreshold: null };
}

export function applyThresholdEdit(state: DashboardState, value: number): DashboardState {
  return { ...state, pendingThreshold: value };
}

export function applyConnection(
  state: DashboardState,
  connection: ConnectionStatus,
): DashboardState {
  return { ...state, connection };
}

export function applySummary(state: DashboardState, summary: SessionSummary): DashboardState {
  // rehydration after (re)connect: rebuild history, keep whatever window
  // events already streamed in (they are newer than the snapshot)
  const fromSummary = summary.scores.map((s: SummaryScore) => ({
    startMs: s.start_ms,
    endMs: s.end_ms,
    score: s.score,
    nPoints: s.n_points,
    nClusters: s.n_clusters,
    alert: s.alert,
    error: s.error,
  }));
  const newer = state.scores.filter(
    (p) => fromSummary.length === 0 || p.startMs > fromSummary[fromSummary.length - 1].startMs,
  );
  const merged = fromSummary.concat(newer).slice(-SCORE_RING_SIZE);
  const lastAlert = [...merged].reverse().find((p) => p.alert) ?? null;
  const last = merged[merged.length - 1];
  return {
    ...state,
    scores: merged,
    threshold: summary.threshold,
    alertActive: lastAlert !== null && last !== undefined && last.score < summary.threshold,
    lastAlert,
    connection: summary.state === "closed" ? "closed" : state.connection,
  };
}

export function isValidThreshold(value: number): boolean {
  return Number.isFinite(value) && value > 0 && value < 1;
}
