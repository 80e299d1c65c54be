// Minimal student test page: join a session and stream synthetic gaze
// (the pointer position normalized to the viewport) at a fixed rate.
// This is a development aid for driving the pipeline by hand; the real
// student client is the gaze-estimator web app.

const FLUSH_MS = 500;
const SAMPLE_HZ = 30;

export async function startStudent(
  baseUrl: string,
  sessionId: string,
  statusEl: HTMLElement,
): Promise<() => void> {
  const resp = await fetch(`${baseUrl}/sessions/${sessionId}/join`, { method: "POST" });
  if (!resp.ok) {
    statusEl.textContent = `join failed: ${resp.status}`;
    throw new Error("join failed");
  }
  const { token } = (await resp.json()) as { token: string };
  const wsBase = baseUrl.replace(/^http/, "ws");
  const ws = new WebSocket(`${wsBase}/ws/student/${sessionId}`);

  let gaze: [number, number] = [0.5, 0.5];
  const onMove = (ev: MouseEvent) => {
    gaze = [ev.clientX / window.innerWidth, ev.clientY / window.innerHeight];
  };
  window.addEventListener("mousemove", onMove);

  const t0 = performance.now();
  let buffer: [number, number, number][] = [];
  const sampler = setInterval(() => {
    buffer.push([Math.round(performance.now() - t0), gaze[0], gaze[1]]);
  }, 1000 / SAMPLE_HZ);
  const flusher = setInterval(() => {
    if (ws.readyState === WebSocket.OPEN && buffer.length) {
      ws.send(JSON.stringify({ type: "gaze", token, samples: buffer }));
      buffer = [];
    }
  }, FLUSH_MS);
  ws.onmessage = (ev) => {
    const ack = JSON.parse(String(ev.data));
    if (ack.type === "ack") {
      statusEl.textContent = `streaming (accepted ${ack.accepted}, dropped ${ack.dropped})`;
    }
  };

  return () => {
    clearInterval(sampler);
    clearInterval(flusher);
    window.removeEventListener("mousemove", onMove);
    ws.close();
  };
}
