"""Scenario scripts: who is in the synthetic class and where it looks.

A script is a timeline of focus episodes (one region, a split between two
regions, or no focus at all) plus a roster of student behavior profiles.
The 3x3 focus grid centers sit at {1/6, 1/2, 5/6} on each axis, numbered
row-major from the top-left (y grows downward, as screen coordinates do).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Union

import yaml

from ..errors import ConfigError

_GRID = (1.0 / 6.0, 1.0 / 2.0, 5.0 / 6.0)

REGION_CENTERS: dict[int, tuple[float, float]] = {
    row * 3 + col + 1: (_GRID[col], _GRID[row]) for row in range(3) for col in range(3)
}

BEHAVIORS = ("attentive", "distracted", "intermittent")

DEFAULT_MSE_TARGET = 0.07
GLASSES_MSE_TARGET = 0.12
DEFAULT_SAMPLE_RATE_HZ = 30.0


@dataclass(frozen=True)
class FocusRegion:
    region_id: int

    def __post_init__(self) -> None:
        if self.region_id not in REGION_CENTERS:
            raise ValueError(f"region_id must be 1..9, got {self.region_id}")

    @property
    def focus_point(self) -> tuple[float, float]:
        return REGION_CENTERS[self.region_id]


@dataclass(frozen=True)
class RegionFocus:
    region: FocusRegion


@dataclass(frozen=True)
class SplitFocus:
    """A class split between two regions; ``ratio`` looks at ``first``."""

    first: FocusRegion
    second: FocusRegion
    ratio: float

    def __post_init__(self) -> None:
        if not 0 < self.ratio < 1:
            raise ValueError("split ratio must be in (0, 1)")


FocusSpec = Union[RegionFocus, SplitFocus, None]


@dataclass(frozen=True)
class Episode:
    duration_ms: int
    focus: FocusSpec

    def __post_init__(self) -> None:
        if self.duration_ms <= 0:
            raise ValueError("episode duration_ms must be positive")


@dataclass(frozen=True)
class StudentProfile:
    """Per-student behavior and noise model.

    ``mse_target`` is the expected squared distance of attentive samples
    from the focus point, so per-axis noise is sigma = sqrt(mse_target/2).
    Intermittent students flip attentive<->distracted as a two-state Markov
    chain with the given per-second rates.
    """

    behavior: str = "attentive"
    mse_target: float = DEFAULT_MSE_TARGET
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ
    p_lose_per_s: float = 0.05
    p_regain_per_s: float = 0.05

    def __post_init__(self) -> None:
        if self.behavior not in BEHAVIORS:
            raise ValueError(f"behavior must be one of {BEHAVIORS}")
        if not self.mse_target > 0:
            raise ValueError("mse_target must be positive")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        for p in (self.p_lose_per_s, self.p_regain_per_s):
            if not 0 <= p <= 1:
                raise ValueError("transition probabilities must be in [0, 1]")

    @property
    def sigma(self) -> float:
        return (self.mse_target / 2.0) ** 0.5


@dataclass(frozen=True)
class ScenarioScript:
    timeline: tuple[Episode, ...]
    roster: tuple[StudentProfile, ...]
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self) -> None:
        if not self.timeline:
            raise ValueError("timeline must have at least one episode")
        if not self.roster:
            raise ValueError("roster must have at least one student")

    @property
    def total_ms(self) -> int:
        return sum(e.duration_ms for e in self.timeline)

    def episode_boundaries(self) -> list[int]:
        """Cumulative episode start times, ending with total_ms."""
        bounds = [0]
        for e in self.timeline:
            bounds.append(bounds[-1] + e.duration_ms)
        return bounds


def _parse_focus(raw: Mapping[str, Any]) -> FocusSpec:
    if "split" in raw:
        pair = raw["split"]
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            raise ConfigError("timeline: split must be a two-element list of regions")
        ratio = raw.get("ratio", 0.5)
        try:
            return SplitFocus(FocusRegion(int(pair[0])), FocusRegion(int(pair[1])), float(ratio))
        except ValueError as exc:
            raise ConfigError(f"timeline: {exc}") from exc
    focus = raw.get("focus")
    if focus is None or focus == "none":
        return None
    try:
        return RegionFocus(FocusRegion(int(focus)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"timeline: {exc}") from exc


def script_from_dict(raw: Mapping[str, Any], name: str = "scenario") -> ScenarioScript:
    """Build a script from a parsed config mapping (see docs/scenario schema)."""
    known = {"seed", "roster", "timeline", "name"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown scenario fields: {sorted(unknown)}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed: must be an integer")

    roster: list[StudentProfile] = []
    for i, entry in enumerate(raw.get("roster") or []):
        entry = dict(entry)
        count = entry.pop("count", 1)
        if not (isinstance(count, int) and count >= 1):
            raise ConfigError(f"roster[{i}]: count must be a positive integer")
        try:
            profile = StudentProfile(**entry)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"roster[{i}]: {exc}") from exc
        roster.extend([profile] * count)

    timeline: list[Episode] = []
    for i, entry in enumerate(raw.get("timeline") or []):
        if not isinstance(entry, Mapping):
            raise ConfigError(f"timeline[{i}]: must be a mapping")
        duration = entry.get("duration_ms")
        if not (isinstance(duration, int) and duration > 0):
            raise ConfigError(f"timeline[{i}]: duration_ms must be a positive integer")
        timeline.append(Episode(duration, _parse_focus(entry)))

    try:
        return ScenarioScript(
            timeline=tuple(timeline),
            roster=tuple(roster),
            seed=seed,
            name=str(raw.get("name", name)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_script(path: str | Path) -> ScenarioScript:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"scenario file: {exc}") from exc
    raw = yaml.safe_load(text)
    if not isinstance(raw, dict):
        raise ConfigError("scenario file: top level must be a mapping")
    return script_from_dict(raw, name=path.stem)
