"""Synthetic gaze stream generation and the gaze-error measurement.

Attentive samples are isotropic Gaussian noise around the active focus
point (sigma chosen so the expected squared error equals the profile's
mse_target); distracted samples are uniform on the unit square. Samples
are emitted raw, without clamping: admission is the server's job, exactly
as with a real estimator.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..errors import EmptyDistributionError
from ..metrics import GazeDistribution
from ..seeds import DOMAIN_STUDENT_STREAM, generator_for
from .scenario import FocusRegion, RegionFocus, ScenarioScript, SplitFocus

Sample = tuple[float, float, float]  # (t_ms, x, y)

CLIENT_FLUSH_MS = 500.0
CLIENT_MAX_BATCH = 32


def generate_student_stream(script: ScenarioScript, student_index: int) -> list[Sample]:
    """Deterministic sample stream for one student (derived seed)."""
    profile = script.roster[student_index]
    gen = generator_for(script.seed, DOMAIN_STUDENT_STREAM, student_index)
    dt = 1000.0 / profile.sample_rate_hz
    p_lose = min(profile.p_lose_per_s / profile.sample_rate_hz, 1.0)
    p_regain = min(profile.p_regain_per_s / profile.sample_rate_hz, 1.0)

    attentive = profile.behavior != "distracted"
    samples: list[Sample] = []
    episode_idx = -1
    split_target: tuple[float, float] | None = None
    bounds = script.episode_boundaries()
    total = script.total_ms

    t = 0.0
    while t < total:
        while episode_idx + 1 < len(bounds) - 1 and t >= bounds[episode_idx + 1]:
            episode_idx += 1
            split_target = None
        if episode_idx < 0:
            episode_idx = 0
        focus = script.timeline[episode_idx].focus

        if profile.behavior == "intermittent":
            if attentive and gen.random() < p_lose:
                attentive = False
            elif not attentive and gen.random() < p_regain:
                attentive = True

        target: tuple[float, float] | None = None
        if isinstance(focus, RegionFocus):
            target = focus.region.focus_point
        elif isinstance(focus, SplitFocus):
            if split_target is None:
                pick = focus.first if gen.random() < focus.ratio else focus.second
                split_target = pick.focus_point
            target = split_target

        if attentive and target is not None:
            noise = gen.standard_normal(2) * profile.sigma
            x, y = target[0] + noise[0], target[1] + noise[1]
        else:
            x, y = gen.random(2)
        samples.append((t, float(x), float(y)))
        t += dt
    return samples


def generate_stream(script: ScenarioScript) -> list[list[Sample]]:
    """Per-student sample streams; students are independent and reorderable."""
    return [generate_student_stream(script, i) for i in range(len(script.roster))]


def batch_stream(
    samples: Sequence[Sample],
    flush_ms: float = CLIENT_FLUSH_MS,
    max_batch: int = CLIENT_MAX_BATCH,
) -> list[tuple[float, list[Sample]]]:
    """Group a sample stream into client flushes: every flush_ms or 32 points.

    Returns (flush_time_ms, batch) pairs; the flush time is when the client
    would put the batch on the wire.
    """
    batches: list[tuple[float, list[Sample]]] = []
    current: list[Sample] = []
    deadline = 0.0
    for s in samples:
        if not current:
            deadline = s[0] + flush_ms
        current.append(s)
        if len(current) >= max_batch:
            batches.append((s[0], current))
            current = []
        elif s[0] >= deadline:
            batches.append((deadline, current))
            current = []
    if current:
        batches.append((max(deadline, current[-1][0]), current))
    return batches


def _as_xy(points) -> np.ndarray:
    if isinstance(points, GazeDistribution):
        return points.coordinates()
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ValueError("points must be an (n, >=2) array or GazeDistribution")
    return arr[:, :2] if arr.shape[1] == 2 else arr[:, -2:]


def measure_mse(points, focus: FocusRegion | tuple[float, float]) -> float:
    """Mean squared distance from the points to the focus point."""
    xy = _as_xy(points)
    if xy.shape[0] == 0:
        raise EmptyDistributionError("measure_mse of an empty point set")
    fx, fy = focus.focus_point if isinstance(focus, FocusRegion) else focus
    dx = xy[:, 0] - fx
    dy = xy[:, 1] - fy
    sq = (dx * dx).tolist()
    sq += (dy * dy).tolist()
    return math.fsum(sq) / xy.shape[0]
