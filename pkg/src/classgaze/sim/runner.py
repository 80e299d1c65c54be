"""Drive a scenario against the session pipeline, in-process or over sockets.

In-process mode wires generated batches straight into a SessionEngine with
scripted time, which is fully deterministic and fast enough to replay
minutes of class in well under a second of wall time. Socket mode speaks
the real wire protocol as one concurrent client per student.
"""

from __future__ import annotations

import asyncio
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import httpx
import websockets

from ..errors import ClassGazeError
from ..service.config import SessionConfig, session_config_from_dict
from ..service.engine import SessionEngine
from ..service.records import RecordWriter
from .generate import batch_stream, generate_stream
from .scenario import ScenarioScript

logger = logging.getLogger(__name__)

ABORT_CLIENT_FAILURE_FRACTION = 0.5


@dataclass
class ScenarioSummary:
    session_id: str
    events: list[dict[str, Any]]
    alerts: list[dict[str, Any]]
    accepted: int
    dropped: int
    client_failures: int = 0
    record_path: str | None = None

    @property
    def scores(self) -> list[float]:
        return [e["score"] for e in self.events]

    def to_dict(self) -> dict[str, Any]:
        return {
            "session": self.session_id,
            "windows": len(self.events),
            "scores": [
                {
                    "start_ms": e["start_ms"],
                    "end_ms": e["end_ms"],
                    "score": e["score"],
                    "n_points": e["n_points"],
                    "n_clusters": e["n_clusters"],
                    "alert": e["alert"],
                }
                for e in self.events
            ],
            "alerts": self.alerts,
            "accepted": self.accepted,
            "dropped": self.dropped,
            "client_failures": self.client_failures,
            "record": self.record_path,
        }


def merged_batches(script: ScenarioScript) -> list[tuple[float, int, list]]:
    """All client flushes across the roster, ordered by wire time."""
    merged: list[tuple[float, int, list]] = []
    for idx, samples in enumerate(generate_stream(script)):
        for flush_t, batch in batch_stream(samples):
            merged.append((flush_t, idx, batch))
    merged.sort(key=lambda item: (item[0], item[1]))
    return merged


def run_scenario_in_process(
    script: ScenarioScript,
    session_config: SessionConfig | None = None,
    record_path: str | Path | None = None,
) -> ScenarioSummary:
    """Feed the scenario through a fresh engine with scripted time."""
    if session_config is None:
        session_config = session_config_from_dict({"seed": script.seed})
    elif session_config.seed is None:
        from dataclasses import replace

        session_config = replace(session_config, seed=script.seed)

    record = None
    engine = SessionEngine(session_config)
    if record_path is not None:
        record = RecordWriter(
            record_path, engine.session_id, session_config.to_dict(), session_config.seed
        )
        engine.record = record

    tokens = [engine.join(0.0) for _ in script.roster]
    accepted = dropped = 0
    events = []
    for flush_t, student_idx, batch in merged_batches(script):
        events.extend(engine.advance(flush_t))
        a, d = engine.ingest(tokens[student_idx], [list(s) for s in batch], flush_t)
        accepted += a
        dropped += d
    # flush every window that can still hold data, but do not emit windows
    # that start at or after the scenario end (they would be empty)
    tail = script.total_ms + session_config.window.window_len_ms - session_config.window.stride_ms
    events.extend(engine.advance(tail))
    engine.close(tail)

    return ScenarioSummary(
        session_id=engine.session_id,
        events=[e.to_wire() for e in events],
        alerts=[
            {
                "window_index": a.window_index,
                "start_ms": int(a.window_start),
                "end_ms": int(a.window_end),
                "score": a.score,
            }
            for a in engine.alert_tracker.alerts
        ],
        accepted=accepted,
        dropped=dropped,
        record_path=str(record_path) if record_path is not None else None,
    )


async def _student_client(
    base_ws: str,
    session_id: str,
    token: str,
    batches: list[tuple[float, list]],
    time_scale: float,
    t0: float,
    failures: list[int],
    student_idx: int,
) -> tuple[int, int]:
    accepted = dropped = 0
    try:
        async with websockets.connect(f"{base_ws}/ws/student/{session_id}") as ws:
            loop = asyncio.get_running_loop()
            for flush_t, batch in batches:
                delay = t0 + flush_t / 1000.0 / time_scale - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                await ws.send(
                    json.dumps(
                        {"type": "gaze", "token": token, "samples": [list(s) for s in batch]}
                    )
                )
                ack = json.loads(await ws.recv())
                if ack.get("type") == "ack":
                    accepted += ack["accepted"]
                    dropped += ack["dropped"]
    except Exception as exc:
        logger.warning("student %d failed: %s", student_idx, exc)
        failures.append(student_idx)
    return accepted, dropped


async def _run_scenario_socket(
    script: ScenarioScript,
    endpoint: str,
    time_scale: float,
    settle_s: float,
    session_config: SessionConfig | None = None,
    session_id: str | None = None,
    instructor_key: str | None = None,
) -> ScenarioSummary:
    base_http = endpoint.rstrip("/")
    base_ws = base_http.replace("http://", "ws://").replace("https://", "wss://")

    async with httpx.AsyncClient(base_url=base_http, timeout=10.0) as client:
        if session_id is None:
            body = (
                session_config.to_dict() if session_config is not None else {"seed": script.seed}
            )
            resp = await client.post("/sessions", json=body)
            resp.raise_for_status()
            created = resp.json()
            session_id, instructor_key = created["session_id"], created["instructor_key"]

        tokens = []
        for _ in script.roster:
            r = await client.post(f"/sessions/{session_id}/join")
            r.raise_for_status()
            tokens.append(r.json()["token"])

        events: list[dict[str, Any]] = []

        async def instructor_listener() -> None:
            async with websockets.connect(
                f"{base_ws}/ws/instructor/{session_id}?key={instructor_key}"
            ) as ws:
                while True:
                    msg = json.loads(await ws.recv())
                    if msg.get("type") == "window":
                        events.append(msg)

        # when driving someone else's session without its key, the caller
        # owns the instructor channel; we only stream students
        listener = (
            asyncio.create_task(instructor_listener()) if instructor_key is not None else None
        )
        per_student = [batch_stream(s) for s in generate_stream(script)]
        failures: list[int] = []
        t0 = asyncio.get_running_loop().time()
        results = await asyncio.gather(
            *(
                _student_client(
                    base_ws, session_id, tokens[i], per_student[i], time_scale, t0, failures, i
                )
                for i in range(len(tokens))
            )
        )
        if len(failures) > len(tokens) * ABORT_CLIENT_FAILURE_FRACTION:
            if listener is not None:
                listener.cancel()
            raise ClassGazeError(
                f"scenario aborted: {len(failures)}/{len(tokens)} clients failed"
            )
        await asyncio.sleep(settle_s)
        alerts: list[dict[str, Any]] = []
        if listener is not None:
            listener.cancel()
            summary_resp = await client.get(
                f"/sessions/{session_id}/summary", headers={"x-instructor-key": instructor_key}
            )
            summary_resp.raise_for_status()
            alerts = summary_resp.json().get("alerts", [])

    return ScenarioSummary(
        session_id=session_id,
        events=events,
        alerts=alerts,
        accepted=sum(r[0] for r in results),
        dropped=sum(r[1] for r in results),
        client_failures=len(failures),
    )


def run_scenario(
    script: ScenarioScript,
    endpoint: str | None = None,
    session_config: SessionConfig | None = None,
    record_path: str | Path | None = None,
    time_scale: float = 1.0,
    settle_s: float = 1.0,
    session_id: str | None = None,
    instructor_key: str | None = None,
) -> ScenarioSummary:
    """Run a scenario end to end; in-process when no endpoint is given.

    In socket mode, pass ``session_id`` to stream into an existing session
    instead of creating one (``instructor_key`` optional; without it the
    summary and event collection are skipped).
    """
    if endpoint is None:
        return run_scenario_in_process(script, session_config, record_path)
    return asyncio.run(
        _run_scenario_socket(
            script, endpoint, time_scale, settle_s, session_config, session_id, instructor_key
        )
    )
