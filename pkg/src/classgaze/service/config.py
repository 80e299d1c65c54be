"""Session and service configuration: defaults, files, environment overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from ..clustering import ClusteringParams
from ..errors import ConfigError
from ..heatmap import DEFAULT_COLS, DEFAULT_ROWS
from ..metrics import WindowConfig
from ..scoring import AlertPolicy

ENV_PREFIX = "CLASSGAZE_"


@dataclass(frozen=True)
class SessionConfig:
    """Everything one session needs; the seed pins ids, tokens, and analyses."""

    window: WindowConfig = field(default_factory=WindowConfig)
    clustering: ClusteringParams = field(default_factory=ClusteringParams)
    alert: AlertPolicy = field(default_factory=AlertPolicy)
    heatmap_rows: int = DEFAULT_ROWS
    heatmap_cols: int = DEFAULT_COLS
    seed: int | None = None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "window": {
                "window_len_ms": self.window.window_len_ms,
                "stride_ms": self.window.stride_ms,
            },
            "clustering": {
                "min_samples": self.clustering.min_samples,
                "eps_mode": self.clustering.eps_mode,
            },
            "alert": {
                "threshold": self.alert.threshold,
                "consecutive_windows": self.alert.consecutive_windows,
                "cooloff_windows": self.alert.cooloff_windows,
            },
            "heatmap": {"rows": self.heatmap_rows, "cols": self.heatmap_cols},
            "seed": self.seed,
        }
        if self.clustering.eps_mode == "fixed":
            d["clustering"]["eps"] = self.clustering.eps
        return d


def _build(section: str, factory, kwargs: dict[str, Any]):
    try:
        return factory(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def session_config_from_dict(raw: Mapping[str, Any] | None) -> SessionConfig:
    """Parse a session config mapping; error messages name the offending field."""
    raw = dict(raw or {})
    known = {"window", "clustering", "alert", "heatmap", "seed"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")

    window = _build("window", WindowConfig, dict(raw.get("window") or {}))
    clustering = _build("clustering", ClusteringParams, dict(raw.get("clustering") or {}))
    alert = _build("alert", AlertPolicy, dict(raw.get("alert") or {}))
    heat = dict(raw.get("heatmap") or {})
    rows = heat.get("rows", DEFAULT_ROWS)
    cols = heat.get("cols", DEFAULT_COLS)
    if not (isinstance(rows, int) and rows > 0 and isinstance(cols, int) and cols > 0):
        raise ConfigError("heatmap: rows and cols must be positive integers")
    seed = raw.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise ConfigError("seed: must be an integer")
    return SessionConfig(
        window=window,
        clustering=clustering,
        alert=alert,
        heatmap_rows=rows,
        heatmap_cols=cols,
        seed=seed,
    )


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8400
    record_dir: Path | None = None
    session_defaults: SessionConfig = field(default_factory=SessionConfig)


def load_service_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
    **overrides: Any,
) -> ServiceConfig:
    """Load the service config from a YAML file, then apply env and overrides.

    Recognized environment variables (all optional): CLASSGAZE_HOST,
    CLASSGAZE_PORT, CLASSGAZE_RECORD_DIR, CLASSGAZE_WINDOW_LEN_MS,
    CLASSGAZE_STRIDE_MS, CLASSGAZE_MIN_SAMPLES, CLASSGAZE_THRESHOLD,
    CLASSGAZE_SEED.
    """
    env = os.environ if env is None else env
    raw: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"config file: {exc}") from exc
        loaded = yaml.safe_load(text)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError("config file: top level must be a mapping")
        raw = loaded

    service_known = {"host", "port", "record_dir", "session"}
    unknown = set(raw) - service_known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")

    session_raw = dict(raw.get("session") or {})

    def env_int(name: str) -> int | None:
        val = env.get(ENV_PREFIX + name)
        if val is None:
            return None
        try:
            return int(val)
        except ValueError as exc:
            raise ConfigError(f"{ENV_PREFIX + name}: not an integer: {val!r}") from exc

    def env_float(name: str) -> float | None:
        val = env.get(ENV_PREFIX + name)
        if val is None:
            return None
        try:
            return float(val)
        except ValueError as exc:
            raise ConfigError(f"{ENV_PREFIX + name}: not a number: {val!r}") from exc

    host = env.get(ENV_PREFIX + "HOST", raw.get("host", "127.0.0.1"))
    port = env_int("PORT")
    if port is None:
        port = raw.get("port", 8400)
        if not isinstance(port, int):
            raise ConfigError("port: must be an integer")
    record_dir = env.get(ENV_PREFIX + "RECORD_DIR", raw.get("record_dir"))

    for field_name, env_name, parser in [
        (("window", "window_len_ms"), "WINDOW_LEN_MS", env_int),
        (("window", "stride_ms"), "STRIDE_MS", env_int),
        (("clustering", "min_samples"), "MIN_SAMPLES", env_int),
        (("alert", "threshold"), "THRESHOLD", env_float),
    ]:
        val = parser(env_name)
        if val is not None:
            session_raw.setdefault(field_name[0], {})
            session_raw[field_name[0]] = dict(session_raw[field_name[0]])
            session_raw[field_name[0]][field_name[1]] = val
    seed = env_int("SEED")
    if seed is not None:
        session_raw["seed"] = seed

    cfg = ServiceConfig(
        host=host,
        port=port,
        record_dir=Path(record_dir) if record_dir else None,
        session_defaults=session_config_from_dict(session_raw),
    )
    if overrides:
        from dataclasses import replace

        valid = {"host", "port", "record_dir", "session_defaults"}
        bad = set(overrides) - valid
        if bad:
            raise ConfigError(f"unknown service overrides: {sorted(bad)}")
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg
