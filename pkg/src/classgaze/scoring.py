"""Per-window attention scores and threshold alerting.

The default (density) score is clustered_fraction x concentration: the
share of points that landed in any cluster, times the share of clustered
points held by the largest cluster. One dominant cluster scores near 1,
two even clusters score near 0.5, all-noise windows score 0. The
statistical strategy instead squashes the randomization-test z into [0,1].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal

from .clustering import ClusteringResult
from .metrics import GazeDistribution
from .stats import RandomizationConfig, randomization_test

# z at which the statistical score saturates to 1.0; a tight single-focus
# window at defaults lands well past this.
Z_SATURATION = 50.0


@dataclass(frozen=True)
class AttentionScore:
    value: float
    window_start: float
    window_end: float
    n_points: int
    n_clusters: int
    clustered_fraction: float
    concentration: float
    strategy: Literal["density", "statistical"] = "density"
    auto_scaled: bool = False


@dataclass(frozen=True)
class AlertPolicy:
    threshold: float = 0.5
    consecutive_windows: int = 3
    cooloff_windows: int = 5

    def __post_init__(self) -> None:
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must be in (0, 1)")
        if self.consecutive_windows < 1:
            raise ValueError("consecutive_windows must be positive")
        if self.cooloff_windows < 1:
            raise ValueError("cooloff_windows must be positive")


@dataclass(frozen=True)
class AlertEvent:
    window_index: int
    window_start: float
    window_end: float
    score: float


def score_window(
    c: ClusteringResult | None,
    n_points: int,
    window_start: float = 0.0,
    window_end: float = 0.0,
) -> AttentionScore:
    """Density-strategy score for one clustered window.

    ``c`` may be None when the window was empty (n_points == 0).
    """
    if n_points < 0:
        raise ValueError("n_points must be >= 0")
    if n_points == 0 or c is None or c.n_clusters == 0:
        return AttentionScore(
            value=0.0,
            window_start=window_start,
            window_end=window_end,
            n_points=n_points,
            n_clusters=0 if c is None else c.n_clusters,
            clustered_fraction=0.0,
            concentration=0.0,
            auto_scaled=False if c is None else c.auto_scaled,
        )
    clustered = n_points - c.noise_count
    clustered_fraction = clustered / n_points
    concentration = c.cluster_sizes[0] / clustered if clustered else 0.0
    return AttentionScore(
        value=clustered_fraction * concentration,
        window_start=window_start,
        window_end=window_end,
        n_points=n_points,
        n_clusters=c.n_clusters,
        clustered_fraction=clustered_fraction,
        concentration=concentration,
        auto_scaled=c.auto_scaled,
    )


def score_window_statistical(
    d: GazeDistribution,
    cfg: RandomizationConfig,
    z_ref: float = Z_SATURATION,
    null_diffs=None,
) -> AttentionScore:
    """Alternate strategy: clamp(z / z_ref, 0, 1) from the randomization test."""
    result = randomization_test(d, cfg, null_diffs=null_diffs)
    value = min(max(result.z / z_ref, 0.0), 1.0)
    return AttentionScore(
        value=value,
        window_start=d.window_start,
        window_end=d.window_end,
        n_points=d.n,
        n_clusters=0,
        clustered_fraction=0.0,
        concentration=0.0,
        strategy="statistical",
    )


@dataclass
class AlertTracker:
    """Debounced low-attention alerting over an ordered score stream.

    An alert fires when a run of scores strictly below the threshold
    reaches ``consecutive_windows``; the run must be broken by an
    above-threshold window before another alert can arise, so a long dip
    alerts once. After a firing, new alerts are suppressed for the next
    ``cooloff_windows`` windows. Single-writer per session.
    """

    policy: AlertPolicy
    _run: int = 0
    _index: int = -1
    _last_alert_index: int | None = None
    alerts: list[AlertEvent] = field(default_factory=list)

    def push(self, score: AttentionScore) -> AlertEvent | None:
        self._index += 1
        if score.value < self.policy.threshold:
            self._run += 1
        else:
            self._run = 0
            return None
        in_cooloff = (
            self._last_alert_index is not None
            and self._index - self._last_alert_index <= self.policy.cooloff_windows
        )
        if self._run == self.policy.consecutive_windows and not in_cooloff:
            event = AlertEvent(
                window_index=self._index,
                window_start=score.window_start,
                window_end=score.window_end,
                score=score.value,
            )
            self._last_alert_index = self._index
            self.alerts.append(event)
            return event
        return None


def evaluate_alert(
    scores: Iterable[AttentionScore], policy: AlertPolicy
) -> list[AlertEvent]:
    """Run the alert policy over a complete ordered score sequence."""
    tracker = AlertTracker(policy)
    for s in scores:
        tracker.push(s)
    return tracker.alerts
