"""Deterministic per-session pipeline: ingest -> window -> score -> event.

The engine is transport-free and clock-free: callers pass the session time
in milliseconds with every call. The HTTP/WebSocket layer drives it with a
monotonic wall clock; the simulator and the replay path drive it with
scripted time, which makes records reproducible bit-for-bit.

Single-writer contract: all mutating calls for one session come from one
logical writer. Window computations run on immutable snapshots and may be
offloaded to a thread (see ``collect_due`` / ``compute_window`` /
``commit_window``); ``advance`` bundles the three for synchronous callers.
"""

from __future__ import annotations

import logging
import secrets
import time
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..clustering import ClusteringResult, dbscan
from ..errors import (
    ClassGazeError,
    SessionAuthError,
    SessionClosedError,
)
from ..heatmap import HeatmapGrid, bin_points
from ..metrics import GazeDistribution, GazePoint, WindowAccumulator, admit_sample
from ..scoring import AlertTracker, AttentionScore, score_window
from ..seeds import DOMAIN_SESSION_IDENTITY, generator_for
from .config import SessionConfig
from .records import RecordWriter

logger = logging.getLogger(__name__)

SUMMARY_SCORE_LIMIT = 50


class IdentityMinter:
    """Opaque id generation; seeded sessions mint reproducible identities."""

    def __init__(self, seed: int | None) -> None:
        self._gen = None if seed is None else generator_for(seed, DOMAIN_SESSION_IDENTITY)

    def _hex(self, nbytes: int) -> str:
        if self._gen is None:
            return secrets.token_hex(nbytes)
        return bytes(self._gen.bytes(nbytes)).hex()

    def session_id(self) -> str:
        return "ses-" + self._hex(6)

    def student_token(self) -> str:
        return "stu-" + self._hex(8)

    @staticmethod
    def instructor_key() -> str:
        # never derived from the seed: records must not leak a way to forge it
        return "ikey-" + secrets.token_hex(12)


@dataclass(frozen=True)
class WindowComputation:
    """Pure result of processing one window snapshot, ready to commit."""

    dist: GazeDistribution
    clustering: ClusteringResult | None
    score: AttentionScore
    heatmap: HeatmapGrid
    error: str | None
    processing_ms: float


@dataclass(frozen=True)
class WindowEvent:
    session_id: str
    start_ms: float
    end_ms: float
    score: AttentionScore
    heatmap: HeatmapGrid
    alert: bool
    error: bool
    processing_ms: float

    def to_wire(self) -> dict[str, Any]:
        """Instructor-channel payload; carries no per-student data."""
        return {
            "type": "window",
            "session": self.session_id,
            "start_ms": int(self.start_ms),
            "end_ms": int(self.end_ms),
            "score": self.score.value,
            "n_points": self.score.n_points,
            "n_clusters": self.score.n_clusters,
            "heatmap": self.heatmap.to_payload(),
            "alert": self.alert,
            "error": self.error,
            "auto_scaled": self.score.auto_scaled,
        }


def compute_window(dist: GazeDistribution, config: SessionConfig) -> WindowComputation:
    """Cluster and score one window snapshot. Pure; safe on any thread.

    Scoring failures degrade to a zero score with an error marker; the
    window event is always produced.
    """
    t0 = time.perf_counter()
    clustering: ClusteringResult | None = None
    error: str | None = None
    if dist.n > 0:
        try:
            clustering = dbscan(dist, config.clustering)
        except ClassGazeError as exc:
            error = f"{type(exc).__name__}: {exc}"
            logger.warning(
                "window [%s, %s) degraded to score 0: %s",
                dist.window_start,
                dist.window_end,
                error,
            )
    score = score_window(clustering, dist.n, dist.window_start, dist.window_end)
    heatmap = bin_points(dist, config.heatmap_rows, config.heatmap_cols)
    return WindowComputation(
        dist=dist,
        clustering=clustering,
        score=score,
        heatmap=heatmap,
        error=error,
        processing_ms=(time.perf_counter() - t0) * 1000.0,
    )


class SessionEngine:
    """State machine for one class session."""

    def __init__(
        self,
        config: SessionConfig,
        session_id: str | None = None,
        record: RecordWriter | None = None,
        minter: IdentityMinter | None = None,
    ) -> None:
        self.config = config
        self.minter = minter if minter is not None else IdentityMinter(config.seed)
        self.session_id = session_id if session_id is not None else self.minter.session_id()
        self.record = record
        self.state = "open"
        self.roster: set[str] = set()
        self.accumulator = WindowAccumulator(config.window)
        self.alert_tracker = AlertTracker(config.alert)
        self.events: list[WindowEvent] = []
        self.ingested_points = 0
        self.dropped_range = 0
        self.skipped_windows = 0

    # -- membership ---------------------------------------------------------

    def join(self, now_ms: float = 0.0) -> str:
        if self.state != "open":
            raise SessionClosedError(f"session {self.session_id} is closed")
        token = self.minter.student_token()
        self.roster.add(token)
        if self.record:
            self.record.write_join(token, now_ms)
        return token

    def restore_student(self, token: str) -> None:
        """Re-admit a recorded token during replay (no record line written)."""
        self.roster.add(token)

    # -- ingestion ----------------------------------------------------------

    def ingest(
        self, token: str, samples: list[list[float]], now_ms: float
    ) -> tuple[int, int]:
        """Admit one batch; the server arrival time stamps every sample.

        Returns (accepted, dropped). Client timestamps inside ``samples``
        are advisory and never trusted for windowing.
        """
        if self.state != "open":
            raise SessionClosedError(f"session {self.session_id} is closed")
        if token not in self.roster:
            raise SessionAuthError("unknown student token")
        accepted = 0
        dropped = 0
        for sample in samples:
            try:
                _, x, y = sample
                x = float(x)
                y = float(y)
            except (TypeError, ValueError):
                dropped += 1
                continue
            admitted = admit_sample(x, y)
            if admitted is None:
                dropped += 1
                self.dropped_range += 1
                continue
            point = GazePoint(token, now_ms, admitted[0], admitted[1])
            if self.accumulator.append(point):
                accepted += 1
            else:
                dropped += 1
        self.ingested_points += accepted
        if self.record:
            self.record.write_batch(token, now_ms, samples, accepted, dropped)
        return accepted, dropped

    # -- windowing ----------------------------------------------------------

    def collect_due(
        self, now_ms: float, max_lag_windows: int | None = None
    ) -> list[GazeDistribution]:
        """Pop every window that has closed by ``now_ms``, oldest first.

        When processing lags more than ``max_lag_windows`` strides behind,
        skip straight to the most recent window and count the rest.
        """
        if max_lag_windows is not None:
            due = self.accumulator.due_windows(now_ms)
            if due > max_lag_windows:
                skipped = self.accumulator.skip_to_latest(now_ms)
                self.skipped_windows += skipped
                logger.warning(
                    "session %s lagging: skipped %d windows", self.session_id, skipped
                )
        return list(self.accumulator.advance(now_ms))

    def commit_window(self, comp: WindowComputation) -> WindowEvent:
        alert = self.alert_tracker.push(comp.score)
        event = WindowEvent(
            session_id=self.session_id,
            start_ms=comp.dist.window_start,
            end_ms=comp.dist.window_end,
            score=comp.score,
            heatmap=comp.heatmap,
            alert=alert is not None,
            error=comp.error is not None,
            processing_ms=comp.processing_ms,
        )
        self.events.append(event)
        if self.record:
            self.record.write_event(event.to_wire(), comp.dist.window_end)
        return event

    def advance(
        self, now_ms: float, max_lag_windows: int | None = None
    ) -> list[WindowEvent]:
        """Synchronous collect + compute + commit for every due window."""
        return [
            self.commit_window(compute_window(dist, self.config))
            for dist in self.collect_due(now_ms, max_lag_windows)
        ]

    # -- control ------------------------------------------------------------

    def set_threshold(self, value: float, now_ms: float = 0.0) -> None:
        if not isinstance(value, (int, float)) or isinstance(value, bool) or np.isnan(value):
            raise ValueError("threshold must be a number in (0, 1)")
        from dataclasses import replace

        self.alert_tracker.policy = replace(self.alert_tracker.policy, threshold=float(value))
        self.config = replace(self.config, alert=self.alert_tracker.policy)
        if self.record:
            self.record.write_threshold(float(value), now_ms)

    def close(self, now_ms: float = 0.0) -> None:
        if self.state == "closed":
            return
        self.state = "closed"
        if self.record:
            self.record.write_close(now_ms, windows=len(self.events), skipped=self.skipped_windows)

    def summary(self) -> dict[str, Any]:
        """Aggregate-only session snapshot; never includes student tokens."""
        recent = self.events[-SUMMARY_SCORE_LIMIT:]
        return {
            "session": self.session_id,
            "state": self.state,
            "config": self.config.to_dict(),
            "threshold": self.alert_tracker.policy.threshold,
            "roster_size": len(self.roster),
            "ingested_points": self.ingested_points,
            "dropped_range": self.dropped_range,
            "dropped_late": self.accumulator.dropped_late,
            "windows_published": len(self.events),
            "skipped_windows": self.skipped_windows,
            "alerts": [
                {
                    "window_index": a.window_index,
                    "start_ms": int(a.window_start),
                    "end_ms": int(a.window_end),
                    "score": a.score,
                }
                for a in self.alert_tracker.alerts
            ],
            "scores": [
                {
                    "start_ms": int(e.start_ms),
                    "end_ms": int(e.end_ms),
                    "score": e.score.value,
                    "n_points": e.score.n_points,
                    "n_clusters": e.score.n_clusters,
                    "alert": e.alert,
                    "error": e.error,
                }
                for e in recent
            ],
        }


def replay_session(
    header: dict[str, Any], entries: list[dict[str, Any]]
) -> tuple[SessionEngine, list[WindowEvent]]:
    """Rebuild a session from its record and reprocess every batch.

    Record order is causal order: batches are ingested as they appear, and
    window emission is driven by the recorded event lines, so the replayed
    engine sees exactly the frontier the live engine saw. Comparing the
    regenerated events against the recorded ones is the determinism check.
    """
    from .config import session_config_from_dict

    raw_config = dict(header.get("config") or {})
    raw_config.setdefault("seed", header.get("seed"))
    config = session_config_from_dict(raw_config)
    engine = SessionEngine(config, session_id=header["session"])
    events: list[WindowEvent] = []
    for entry in entries:
        kind = entry["type"]
        if kind == "join":
            engine.restore_student(entry["token"])
        elif kind == "batch":
            engine.ingest(entry["token"], entry["samples"], float(entry["t_ms"]))
        elif kind == "event":
            events.extend(engine.advance(float(entry["event"]["end_ms"])))
        elif kind == "threshold":
            engine.set_threshold(entry["value"], float(entry["t_ms"]))
        elif kind == "close":
            engine.close(float(entry["t_ms"]))
    return engine, events
