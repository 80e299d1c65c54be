// Wire types for the instructor channel and HTTP endpoints.
// These mirror the server's documented protocol verbatim; the dashboard
// only ever sees aggregate data.

export interface HeatmapPayload {
  rows: number;
  cols: number;
  counts: number[]; // rows*cols, row-major, row 0 = top edge
}

export interface WindowEventMsg {
  type: "window";
  session: string;
  start_ms: number;
  end_ms: number;
  score: number;
  n_points: number;
  n_clusters: number;
  heatmap: HeatmapPayload;
  alert: boolean;
  error: boolean;
  auto_scaled: boolean;
}

export interface ThresholdMsg {
  type: "threshold";
  session: string;
  value: number;
}

export interface ErrorMsg {
  type: "error";
  error: string;
}

export type InstructorMsg = WindowEventMsg | ThresholdMsg | ErrorMsg;

export interface SummaryScore {
  start_ms: number;
  end_ms: number;
  score: number;
  n_points: number;
  n_clusters: number;
  alert: boolean;
  error: boolean;
}

export interface SessionSummary {
  session: string;
  state: "open" | "closed";
  threshold: number;
  roster_size: number;
  windows_published: number;
  scores: SummaryScore[];
  alerts: { window_index: number; start_ms: number; end_ms: number; score: number }[];
}

export type ConnectionStatus =
  | "connecting"
  | "live"
  | "reconnecting"
  | "auth_failed"
  | "closed";
