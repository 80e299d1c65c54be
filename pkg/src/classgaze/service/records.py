"""Append-only newline-delimited JSON session records.

One file per session: a header line with config and seed, then one line per
join, per ingest batch, per published instructor event, per threshold
change, and a final close line. Records are the replay backbone: feeding
the recorded batches back through a fresh engine reproduces the recorded
events exactly (wall-clock header fields excluded).

Line shapes (all JSON objects, sorted keys, compact separators):

    {"type":"header","version":1,"session":...,"seed":...,"config":{...},
     "created_wall_ms":...}
    {"type":"join","t_ms":...,"token":...}
    {"type":"batch","t_ms":...,"token":...,"samples":[[t,x,y],...],
     "accepted":...,"dropped":...}
    {"type":"event","t_ms":...,"event":{...instructor wire event...}}
    {"type":"threshold","t_ms":...,"value":...}
    {"type":"close","t_ms":...,"windows":...,"skipped":...}
"""

from __future__ import annotations

import json
import logging
import time
from pathlib import Path
from typing import Any, IO, Iterator

logger = logging.getLogger(__name__)

RECORD_VERSION = 1

# header keys that carry wall-clock values and are excluded from
# determinism comparisons
WALL_CLOCK_FIELDS = ("created_wall_ms",)


def _dump(obj: dict[str, Any]) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class RecordWriter:
    """Serializes one session's history; flushed line-by-line, closed once."""

    def __init__(
        self,
        path: str | Path,
        session_id: str,
        config: dict[str, Any],
        seed: int | None,
        wall_ms: int | None = None,
    ) -> None:
        self.path = Path(path)
        self._fh: IO[str] | None = self.path.open("w", encoding="utf-8")
        self._write(
            {
                "type": "header",
                "version": RECORD_VERSION,
                "session": session_id,
                "seed": seed,
                "config": config,
                "created_wall_ms": int(time.time() * 1000) if wall_ms is None else wall_ms,
            }
        )

    def _write(self, obj: dict[str, Any]) -> None:
        if self._fh is None:
            return
        self._fh.write(_dump(obj) + "\n")
        self._fh.flush()

    def write_join(self, token: str, t_ms: float) -> None:
        self._write({"type": "join", "t_ms": t_ms, "token": token})

    def write_batch(
        self,
        token: str,
        t_ms: float,
        samples: list[list[float]],
        accepted: int,
        dropped: int,
    ) -> None:
        self._write(
            {
                "type": "batch",
                "t_ms": t_ms,
                "token": token,
                "samples": samples,
                "accepted": accepted,
                "dropped": dropped,
            }
        )

    def write_event(self, event: dict[str, Any], t_ms: float) -> None:
        self._write({"type": "event", "t_ms": t_ms, "event": event})

    def write_threshold(self, value: float, t_ms: float) -> None:
        self._write({"type": "threshold", "t_ms": t_ms, "value": value})

    def write_close(self, t_ms: float, windows: int, skipped: int) -> None:
        self._write({"type": "close", "t_ms": t_ms, "windows": windows, "skipped": skipped})
        self.close()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_record(path: str | Path) -> tuple[dict[str, Any], list[dict[str, Any]], int]:
    """Parse a record file; returns (header, entries, corrupt_line_count).

    Corrupt lines are skipped with a warning, never fatal.
    """
    header: dict[str, Any] | None = None
    entries: list[dict[str, Any]] = []
    corrupt = 0
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict) or "type" not in obj:
                    raise ValueError("not a record object")
            except ValueError as exc:
                corrupt += 1
                logger.warning("%s:%d: skipping corrupt line (%s)", path, lineno, exc)
                continue
            if obj["type"] == "header":
                header = obj
            else:
                entries.append(obj)
    if header is None:
        raise ValueError(f"{path}: no header line found")
    return header, entries, corrupt


def iter_batches(entries: list[dict[str, Any]]) -> Iterator[dict[str, Any]]:
    for e in entries:
        if e["type"] == "batch":
            yield e


def recorded_events(entries: list[dict[str, Any]]) -> list[dict[str, Any]]:
    return [e["event"] for e in entries if e["type"] == "event"]


def strip_wall_clock(header: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in header.items() if k not in WALL_CLOCK_FIELDS}
