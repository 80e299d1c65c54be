"""HTTP + WebSocket front of the session service.

Students push gaze batches over a persistent socket and get per-batch
acks; instructors subscribe to an aggregate-only event stream (score,
heatmap, alert flag) and may adjust the alert threshold live. Window
computation runs off the event loop on immutable snapshots.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import logging
import time
from typing import Any

from fastapi import FastAPI, Header, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from ..errors import ConfigError, SessionAuthError, SessionClosedError
from .config import ServiceConfig, SessionConfig, session_config_from_dict
from .engine import SessionEngine, compute_window
from .records import RecordWriter

logger = logging.getLogger(__name__)

# if window processing falls further behind than this many strides,
# skip ahead and count the gap instead of building a backlog
MAX_LAG_WINDOWS = 2

WS_POLICY_VIOLATION = 1008


def _merge_config(defaults: SessionConfig, body: dict[str, Any] | None) -> SessionConfig:
    raw = defaults.to_dict()
    for key, value in (body or {}).items():
        if isinstance(value, dict) and isinstance(raw.get(key), dict):
            raw[key] = {**raw[key], **value}
        else:
            raw[key] = value
    return session_config_from_dict(raw)


class SessionHost:
    """One live session: engine, monotonic clock, instructor fan-out, ticker."""

    def __init__(self, engine: SessionEngine, instructor_key: str) -> None:
        self.engine = engine
        self.instructor_key = instructor_key
        self._t0 = time.monotonic()
        self.instructors: set[WebSocket] = set()
        self._ticker: asyncio.Task | None = None

    def now_ms(self) -> float:
        return (time.monotonic() - self._t0) * 1000.0

    def start(self) -> None:
        self._ticker = asyncio.create_task(self._run())

    async def stop(self) -> None:
        if self._ticker is not None:
            self._ticker.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await self._ticker
            self._ticker = None
        self.engine.close(self.now_ms())

    async def _run(self) -> None:
        stride = self.engine.config.window.stride_ms
        interval = min(max(stride / 4.0, 20.0), 500.0) / 1000.0
        while self.engine.state == "open":
            await asyncio.sleep(interval)
            try:
                await self.publish_due()
            except Exception:  # pragma: no cover - defensive: keep the session alive
                logger.exception("session %s: window publish failed", self.engine.session_id)

    async def publish_due(self) -> None:
        snapshots = self.engine.collect_due(self.now_ms(), MAX_LAG_WINDOWS)
        for dist in snapshots:
            comp = await asyncio.to_thread(compute_window, dist, self.engine.config)
            event = self.engine.commit_window(comp)
            await self.broadcast(event.to_wire())

    async def broadcast(self, payload: dict[str, Any]) -> None:
        text = json.dumps(payload)
        dead = []
        for ws in self.instructors:
            try:
                await ws.send_text(text)
            except Exception:
                dead.append(ws)
        for ws in dead:
            self.instructors.discard(ws)


class SessionManager:
    def __init__(self, config: ServiceConfig) -> None:
        self.config = config
        self.hosts: dict[str, SessionHost] = {}

    def create(self, body: dict[str, Any] | None) -> SessionHost:
        session_config = _merge_config(self.config.session_defaults, body)
        engine = SessionEngine(session_config)
        if self.config.record_dir is not None:
            self.config.record_dir.mkdir(parents=True, exist_ok=True)
            engine.record = RecordWriter(
                self.config.record_dir / f"{engine.session_id}.ndjson",
                engine.session_id,
                session_config.to_dict(),
                session_config.seed,
            )
        host = SessionHost(engine, engine.minter.instructor_key())
        self.hosts[engine.session_id] = host
        return host

    def get(self, session_id: str) -> SessionHost | None:
        return self.hosts.get(session_id)

    async def shutdown(self) -> None:
        for host in self.hosts.values():
            await host.stop()


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config if config is not None else ServiceConfig()

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        await app.state.manager.shutdown()

    app = FastAPI(title="classgaze", lifespan=lifespan)
    app.state.manager = SessionManager(config)

    @app.exception_handler(ConfigError)
    async def _config_error(request: Request, exc: ConfigError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        try:
            body = await request.json() if await request.body() else None
        except json.JSONDecodeError:
            return JSONResponse(status_code=400, content={"error": "body must be JSON"})
        host = app.state.manager.create(body)
        host.start()
        return {"session_id": host.engine.session_id, "instructor_key": host.instructor_key}

    @app.post("/sessions/{session_id}/join")
    async def join_session(session_id: str):
        host = app.state.manager.get(session_id)
        if host is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        try:
            token = host.engine.join(host.now_ms())
        except SessionClosedError:
            return JSONResponse(status_code=409, content={"error": "session closed"})
        return {"token": token}

    @app.get("/sessions/{session_id}/summary")
    async def summary(session_id: str, x_instructor_key: str = Header(default="")):
        host = app.state.manager.get(session_id)
        if host is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        if x_instructor_key != host.instructor_key:
            return JSONResponse(status_code=401, content={"error": "bad instructor key"})
        return host.engine.summary()

    @app.post("/sessions/{session_id}/close")
    async def close_session(session_id: str, x_instructor_key: str = Header(default="")):
        host = app.state.manager.get(session_id)
        if host is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        if x_instructor_key != host.instructor_key:
            return JSONResponse(status_code=401, content={"error": "bad instructor key"})
        await host.stop()
        return {"state": host.engine.state}

    @app.websocket("/ws/student/{session_id}")
    async def student_ws(ws: WebSocket, session_id: str):
        host = app.state.manager.get(session_id)
        if host is None:
            await ws.close(code=WS_POLICY_VIOLATION)
            return
        await ws.accept()
        try:
            while True:
                try:
                    msg = json.loads(await ws.receive_text())
                except json.JSONDecodeError:
                    await ws.send_text(json.dumps({"type": "error", "error": "bad frame"}))
                    continue
                if msg.get("type") != "gaze":
                    await ws.send_text(
                        json.dumps({"type": "error", "error": "expected gaze frame"})
                    )
                    continue
                try:
                    accepted, dropped = host.engine.ingest(
                        msg.get("token", ""), msg.get("samples", []), host.now_ms()
                    )
                except SessionAuthError:
                    await ws.send_text(json.dumps({"type": "error", "error": "invalid token"}))
                    await ws.close(code=WS_POLICY_VIOLATION)
                    return
                except SessionClosedError:
                    await ws.send_text(json.dumps({"type": "error", "error": "session closed"}))
                    await ws.close(code=WS_POLICY_VIOLATION)
                    return
                await ws.send_text(
                    json.dumps({"type": "ack", "accepted": accepted, "dropped": dropped})
                )
        except WebSocketDisconnect:
            pass

    @app.websocket("/ws/instructor/{session_id}")
    async def instructor_ws(ws: WebSocket, session_id: str):
        host = app.state.manager.get(session_id)
        if host is None or ws.query_params.get("key") != getattr(host, "instructor_key", None):
            await ws.close(code=WS_POLICY_VIOLATION)
            return
        await ws.accept()
        host.instructors.add(ws)
        try:
            while True:
                try:
                    msg = json.loads(await ws.receive_text())
                except json.JSONDecodeError:
                    await ws.send_text(json.dumps({"type": "error", "error": "bad frame"}))
                    continue
                if msg.get("type") == "set_threshold":
                    try:
                        value = float(msg.get("value"))
                        host.engine.set_threshold(value, host.now_ms())
                    except (TypeError, ValueError) as exc:
                        await ws.send_text(json.dumps({"type": "error", "error": str(exc)}))
                        continue
                    await host.broadcast(
                        {
                            "type": "threshold",
                            "session": session_id,
                            "value": host.engine.alert_tracker.policy.threshold,
                        }
                    )
                else:
                    await ws.send_text(json.dumps({"type": "error", "error": "unknown message"}))
        except WebSocketDisconnect:
            pass
        finally:
            host.instructors.discard(ws)

    return app
