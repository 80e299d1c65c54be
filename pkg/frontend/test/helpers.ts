// Shared fakes for socket and fetch.

import type { FetchLike, SocketFactory, SocketLike } from "../src/client.js";

export class FakeSocket implements SocketLike {
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;
  sent: string[] = [];
  closed = false;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }

  // test controls
  open(): void {
    this.onopen?.();
  }

  drop(): void {
    this.onclose?.();
  }

  push(obj: unknown): void {
    this.onmessage?.({ data: JSON.stringify(obj) });
  }
}

export class FakeSocketHub {
  sockets: FakeSocket[] = [];
  urls: string[] = [];

  factory: SocketFactory = (url: string) => {
    const s = new FakeSocket();
    this.sockets.push(s);
    this.urls.push(url);
    return s;
  };

  get latest(): FakeSocket {
    return this.sockets[this.sockets.length - 1];
  }
}

export function fakeFetch(
  responder: (url: string) => { status: number; body?: unknown },
): FetchLike {
  return async (url: string) => {
    const { status, body } = responder(url);
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => body,
    };
  };
}

export function windowEvent(overrides: Record<string, unknown> = {}) {
  const counts = new Array(32 * 32).fill(0);
  counts[5 * 32 + 7] = 40;
  counts[5 * 32 + 8] = 22;
  return {
    type: "window",
    session: "ses-test",
    start_ms: 0,
    end_ms: 2000,
    score: 0.8,
    n_points: 62,
    n_clusters: 1,
    heatmap: { rows: 32, cols: 32, counts },
    alert: false,
    error: false,
    auto_scaled: false,
    ...overrides,
  };
}

export async function waitFor(
  predicate: () => boolean,
  timeoutMs = 5000,
  intervalMs = 10,
): Promise<void> {
  const t0 = Date.now();
  while (!predicate()) {
    if (Date.now() - t0 > timeoutMs) throw new Error("waitFor timed out");
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
}
