"""Gaze data model, admission rules, windowing, and the cohesiveness metric.

Cohesiveness is the mean squared Euclidean distance of a gaze distribution
to its centroid: low values mean the class is looking at the same spot.
Sums are evaluated with ``math.fsum`` (exactly rounded), so a given point
set yields the same float64 result on every platform; pinned regression
fixtures rely on that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import EmptyDistributionError

# Admission window for raw gaze estimates. Estimator noise may overshoot the
# screen a little; large overshoot means the student is looking off-screen
# and must not count as on-screen attention.
ADMIT_LO = -0.1
ADMIT_HI = 1.1

DEFAULT_WINDOW_LEN_MS = 10_000
DEFAULT_STRIDE_MS = 2_000


@dataclass(frozen=True)
class GazePoint:
    """One normalized gaze sample from one anonymous student.

    ``t`` is milliseconds since session start; ``x``/``y`` are in [0,1]
    after admission.
    """

    student_token: str
    t: float
    x: float
    y: float


@dataclass(frozen=True)
class Centroid:
    x_c: float
    y_c: float


@dataclass(frozen=True)
class WindowConfig:
    """Sliding-window geometry: windows [k*stride, k*stride + window_len)."""

    window_len_ms: int = DEFAULT_WINDOW_LEN_MS
    stride_ms: int = DEFAULT_STRIDE_MS

    def __post_init__(self) -> None:
        if self.window_len_ms <= 0 or self.stride_ms <= 0:
            raise ValueError("window_len_ms and stride_ms must be positive")
        if self.stride_ms > self.window_len_ms:
            raise ValueError(
                f"stride_ms ({self.stride_ms}) must not exceed "
                f"window_len_ms ({self.window_len_ms}); windows would skip points"
            )


class GazeDistribution:
    """An immutable multiset of gaze points inside one time window."""

    __slots__ = ("points", "window_start", "window_end", "_xs", "_ys")

    def __init__(
        self,
        points: Iterable[GazePoint],
        window_start: float,
        window_end: float,
    ) -> None:
        pts = tuple(points)
        for p in pts:
            if not (window_start <= p.t < window_end):
                raise ValueError(
                    f"point at t={p.t} outside window [{window_start}, {window_end})"
                )
        self.points = pts
        self.window_start = window_start
        self.window_end = window_end
        self._xs: np.ndarray | None = None
        self._ys: np.ndarray | None = None

    @classmethod
    def pooled(cls, points: Iterable[GazePoint]) -> "GazeDistribution":
        """Wrap an arbitrary point collection, deriving bounds from the data."""
        pts = tuple(points)
        if not pts:
            return cls((), 0.0, 0.0)
        ts = [p.t for p in pts]
        return cls(pts, min(ts), max(ts) + 1.0)

    @classmethod
    def from_xy(
        cls, xy: np.ndarray, token: str = "", t: float = 0.0
    ) -> "GazeDistribution":
        """Build a distribution from an (n, 2) coordinate array (all at one t)."""
        pts = [GazePoint(token, t, float(x), float(y)) for x, y in xy]
        return cls(pts, t, t + 1.0)

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def xs(self) -> np.ndarray:
        if self._xs is None:
            self._xs = np.array([p.x for p in self.points], dtype=np.float64)
        return self._xs

    @property
    def ys(self) -> np.ndarray:
        if self._ys is None:
            self._ys = np.array([p.y for p in self.points], dtype=np.float64)
        return self._ys

    def coordinates(self) -> np.ndarray:
        return np.column_stack([self.xs, self.ys]) if self.n else np.empty((0, 2))


def admit_sample(x: float, y: float) -> tuple[float, float] | None:
    """Apply the admission rule to one raw coordinate pair.

    Returns the clamped pair, or None when the sample must be dropped
    (non-finite, or either coordinate outside [-0.1, 1.1]).
    """
    if not (math.isfinite(x) and math.isfinite(y)):
        return None
    if not (ADMIT_LO <= x <= ADMIT_HI and ADMIT_LO <= y <= ADMIT_HI):
        return None
    return (min(max(x, 0.0), 1.0), min(max(y, 0.0), 1.0))


def centroid(d: GazeDistribution) -> Centroid:
    """Arithmetic mean of the distribution's coordinates."""
    if d.n == 0:
        raise EmptyDistributionError("centroid of an empty distribution")
    return Centroid(
        math.fsum(d.xs.tolist()) / d.n,
        math.fsum(d.ys.tolist()) / d.n,
    )


def cohesiveness_of_arrays(xs: np.ndarray, ys: np.ndarray) -> float:
    """Mean squared distance to the centroid for raw coordinate arrays.

    This is the canonical evaluation path: exactly-rounded sums, one final
    division, so results are reproducible bit-for-bit.
    """
    n = xs.shape[0]
    if n == 0:
        raise EmptyDistributionError("cohesiveness of an empty distribution")
    cx = math.fsum(xs.tolist()) / n
    cy = math.fsum(ys.tolist()) / n
    dx = xs - cx
    dy = ys - cy
    sq = (dx * dx).tolist()
    sq += (dy * dy).tolist()
    return math.fsum(sq) / n


def cohesiveness(d: GazeDistribution) -> float:
    """Mean squared Euclidean distance of the points to their centroid.

    Zero iff all points coincide; at most 0.5 for points in the unit square.
    """
    return cohesiveness_of_arrays(d.xs, d.ys)


def cohesiveness_diff(a: GazeDistribution, b: GazeDistribution) -> float:
    """cohesiveness(a) - cohesiveness(b)."""
    return cohesiveness(a) - cohesiveness(b)


def window_indices_for(t: float, cfg: WindowConfig) -> range:
    """Indices k of the windows [k*stride, k*stride+len) that contain t."""
    s, length = cfg.stride_ms, cfg.window_len_ms
    k_max = math.floor(t / s)
    k_min = math.floor((t - length) / s) + 1
    return range(max(k_min, 0), k_max + 1)


def window_stream(
    points: Iterable[GazePoint], cfg: WindowConfig
) -> Iterator[GazeDistribution]:
    """Slice a finished, time-ordered point stream into sliding windows.

    Emits windows k = 0, 1, ... while k*stride <= max point timestamp; a
    point appears in every window whose range contains it. Empty windows
    inside the covered span are emitted so the timeline stays regular.
    """
    buckets: dict[int, list[GazePoint]] = {}
    t_max = None
    for p in points:
        t_max = p.t if t_max is None else max(t_max, p.t)
        for k in window_indices_for(p.t, cfg):
            buckets.setdefault(k, []).append(p)
    if t_max is None:
        return
    last_k = math.floor(t_max / cfg.stride_ms)
    for k in range(0, last_k + 1):
        start = k * cfg.stride_ms
        yield GazeDistribution(buckets.get(k, ()), start, start + cfg.window_len_ms)


@dataclass
class WindowAccumulator:
    """Single-writer buffer that closes sliding windows as time advances.

    Exactly one ingestion path appends per session; ``advance`` hands out
    immutable window snapshots once their end time has passed. Points older
    than the next unemitted window are dropped and counted, never buffered.
    """

    cfg: WindowConfig
    _buffer: list[GazePoint] = field(default_factory=list)
    _next_k: int = 0
    dropped_late: int = 0

    @property
    def next_window_start(self) -> float:
        return self._next_k * self.cfg.stride_ms

    def append(self, p: GazePoint) -> bool:
        """Buffer a point; returns False (and counts it) when it is too late."""
        if p.t < self.next_window_start:
            self.dropped_late += 1
            return False
        self._buffer.append(p)
        return True

    def due_windows(self, now_ms: float) -> int:
        """How many windows have closed (end <= now) but not been emitted."""
        last_closed = math.floor((now_ms - self.cfg.window_len_ms) / self.cfg.stride_ms)
        return max(0, int(last_closed) + 1 - self._next_k)

    def skip_to_latest(self, now_ms: float) -> int:
        """Drop all due windows except the most recent; returns skipped count."""
        due = self.due_windows(now_ms)
        if due <= 1:
            return 0
        skipped = due - 1
        self._next_k += skipped
        self._prune()
        return skipped

    def advance(self, now_ms: float) -> Iterator[GazeDistribution]:
        """Yield every window whose end time has passed, oldest first."""
        while self.due_windows(now_ms) > 0:
            k = self._next_k
            start = k * self.cfg.stride_ms
            end = start + self.cfg.window_len_ms
            pts = [p for p in self._buffer if start <= p.t < end]
            self._next_k += 1
            self._prune()
            yield GazeDistribution(pts, start, end)

    def _prune(self) -> None:
        frontier = self.next_window_start
        self._buffer = [p for p in self._buffer if p.t >= frontier]
