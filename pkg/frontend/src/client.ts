// Instructor-channel client: auto-reconnecting event stream with history
// rehydration from the summary endpoint.
//
// The socket and fetch implementations are injectable so the client runs
// identically in a browser, under jsdom, and in node tests.

import type { InstructorMsg, SessionSummary } from "./types.js";

export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;
export type FetchLike = (
  url: string,
  init?: { headers?: Record<string, string> },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export interface ClientEvents {
  message: (msg: InstructorMsg) => void;
  summary: (summary: SessionSummary) => void;
  status: (status: "connecting" | "live" | "reconnecting" | "auth_failed" | "closed") => void;
}

export interface ClientOptions {
  baseUrl: string; // e.g. http://127.0.0.1:8400
  sessionId: string;
  instructorKey: string;
  socketFactory?: SocketFactory;
  fetchFn?: FetchLike;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
}

const DEFAULT_INITIAL_BACKOFF = 500;
const DEFAULT_MAX_BACKOFF = 8000;

export class InstructorClient {
  private readonly opts: Required<Pick<ClientOptions, "baseUrl" | "sessionId" | "instructorKey">> &
    ClientOptions;
  private socket: SocketLike | null = null;
  private backoffMs: number;
  private stopped = false;
  private everConnected = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private listeners: { [K in keyof ClientEvents]: ClientEvents[K][] } = {
    message: [],
    summary: [],
    status: [],
  };

  constructor(opts: ClientOptions) {
    this.opts = opts;
    this.backoffMs = opts.initialBackoffMs ?? DEFAULT_INITIAL_BACKOFF;
  }

  on<K extends keyof ClientEvents>(event: K, fn: ClientEvents[K]): void {
    this.listeners[event].push(fn);
  }

  private emit<K extends keyof ClientEvents>(
    event: K,
    payload: Parameters<ClientEvents[K]>[0],
  ): void {
    for (const fn of this.listeners[event]) (fn as (p: unknown) => void)(payload);
  }

  wsUrl(): string {
    const base = this.opts.baseUrl.replace(/^http/, "ws").replace(/\/$/, "");
    return `${base}/ws/instructor/${this.opts.sessionId}?key=${encodeURIComponent(
      this.opts.instructorKey,
    )}`;
  }

  private summaryUrl(): string {
    return `${this.opts.baseUrl.replace(/\/$/, "")}/sessions/${this.opts.sessionId}/summary`;
  }

  start(): void {
    this.stopped = false;
    this.emit("status", "connecting");
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.socket?.close();
    this.emit("status", "closed");
  }

  async rehydrate(): Promise<void> {
    const fetchFn = this.opts.fetchFn ?? (fetch as unknown as FetchLike);
    try {
      const resp = await fetchFn(this.summaryUrl(), {
        headers: { "x-instructor-key": this.opts.instructorKey },
      });
      if (resp.status === 401) {
        this.emit("status", "auth_failed");
        return;
      }
      if (!resp.ok) return;
      this.emit("summary", (await resp.json()) as SessionSummary);
    } catch {
      // summary is best-effort; the live stream still flows
    }
  }

  setThreshold(value: number): void {
    // client-side guard mirrors the server rule: threshold in (0, 1)
    if (!(Number.isFinite(value) && value > 0 && value < 1)) {
      throw new RangeError(`threshold must be in (0, 1), got ${value}`);
    }
    this.socket?.send(JSON.stringify({ type: "set_threshold", value }));
  }

  private connect(): void {
    const factory =
      this.opts.socketFactory ?? ((url: string) => new WebSocket(url) as unknown as SocketLike);
    let opened = false;
    const socket = factory(this.wsUrl());
    this.socket = socket;

    socket.onopen = () => {
      opened = true;
      this.everConnected = true;
      this.backoffMs = this.opts.initialBackoffMs ?? DEFAULT_INITIAL_BACKOFF;
      this.emit("status", "live");
      void this.rehydrate();
    };
    socket.onmessage = (ev) => {
      let msg: InstructorMsg;
      try {
        msg = JSON.parse(String(ev.data)) as InstructorMsg;
      } catch {
        return;
      }
      this.emit("message", msg);
    };
    socket.onerror = () => {
      // the close handler owns reconnection
    };
    socket.onclose = () => {
      if (this.stopped) return;
      if (!opened && !this.everConnected) {
        // immediate rejection before any successful connect: check whether
        // the key is bad (distinguishes auth failure from a down server)
        void this.probeAuthThenRetry();
        return;
      }
      this.scheduleReconnect();
    };
  }

  private async probeAuthThenRetry(): Promise<void> {
    const fetchFn = this.opts.fetchFn ?? (fetch as unknown as FetchLike);
    try {
      const resp = await fetchFn(this.summaryUrl(), {
        headers: { "x-instructor-key": this.opts.instructorKey },
      });
      if (resp.status === 401 || resp.status === 404) {
        this.emit("status", "auth_failed");
        return;
      }
    } catch {
      // server unreachable: fall through to retry
    }
    this.scheduleReconnect();
  }

  private scheduleReconnect(): void {
    this.emit("status", "reconnecting");
    const delay = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, this.opts.maxBackoffMs ?? DEFAULT_MAX_BACKOFF);
    this.reconnectTimer = setTimeout(() => {
      if (!this.stopped) this.connect();
    }, delay);
  }
}
