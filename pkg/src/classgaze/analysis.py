"""Offline analyses over session records: plot-ready CSV/JSON tables.

Every analysis is a pure function of the record file (plus explicit
parameters), so outputs are byte-identical across runs and platforms.
Floats are serialized with repr round-tripping; JSON keys are sorted.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .clustering import dbscan
from .errors import ConfigError
from .heatmap import bin_points
from .metrics import (
    GazeDistribution,
    GazePoint,
    admit_sample,
    cohesiveness,
    window_stream,
)
from .service.config import session_config_from_dict
from .service.engine import replay_session
from .service.records import read_record
from .stats import RandomizationConfig, randomization_test

ANALYSES = ("cohesiveness", "randomization-test", "dbscan", "heatmap", "score-series")


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, headers: list[str], rows: list[list[Any]]) -> None:
    lines = [",".join(headers)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, obj: Any) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def admitted_points(entries: list[dict[str, Any]]) -> list[GazePoint]:
    """Re-admit every recorded batch exactly as the live server did."""
    points: list[GazePoint] = []
    for e in entries:
        if e["type"] != "batch":
            continue
        t_ms = float(e["t_ms"])
        for sample in e["samples"]:
            try:
                _, x, y = sample
                coords = admit_sample(float(x), float(y))
            except (TypeError, ValueError):
                continue
            if coords is not None:
                points.append(GazePoint(e["token"], t_ms, coords[0], coords[1]))
    return points


def _load(record_path: str | Path):
    header, entries, corrupt = read_record(record_path)
    raw_config = dict(header.get("config") or {})
    raw_config.setdefault("seed", header.get("seed"))
    config = session_config_from_dict(raw_config)
    return header, entries, corrupt, config


def analyze_cohesiveness(record_path: str | Path, out_dir: Path) -> dict[str, Any]:
    header, entries, corrupt, config = _load(record_path)
    points = admitted_points(entries)
    rows = []
    for w in window_stream(points, config.window):
        rows.append(
            [
                int(w.window_start),
                int(w.window_end),
                w.n,
                cohesiveness(w) if w.n else "",
            ]
        )
    _write_csv(out_dir / "cohesiveness.csv", ["start_ms", "end_ms", "n_points", "cohesiveness"], rows)
    pooled = GazeDistribution.pooled(points)
    result = {
        "session": header["session"],
        "n_points": pooled.n,
        "pooled_cohesiveness": cohesiveness(pooled) if pooled.n else None,
        "windows": len(rows),
        "corrupt_lines": corrupt,
    }
    _write_json(out_dir / "cohesiveness.json", result)
    return result


def analyze_randomization(
    record_path: str | Path,
    out_dir: Path,
    trials: int | None = None,
    sample_size: int | None = None,
    seed: int | None = None,
    reference_record: str | Path | None = None,
    histogram_bins: int = 50,
) -> dict[str, Any]:
    """Randomization test of the record's pooled distribution.

    With ``reference_record`` the observed diff is computed against that
    recorded sample instead of a fresh seeded uniform draw (fixture
    pinning); the null distribution is always seeded.
    """
    header, entries, corrupt, config = _load(record_path)
    points = admitted_points(entries)
    pooled = GazeDistribution.pooled(points)
    cfg = RandomizationConfig(
        trials=5000 if trials is None else trials,
        sample_size=5000 if sample_size is None else sample_size,
        seed=(header.get("seed") or 0) if seed is None else seed,
    )
    reference = None
    ref_cohesiveness = None
    if reference_record is not None:
        _, ref_entries, _, _ = _load(reference_record)
        reference = GazeDistribution.pooled(admitted_points(ref_entries))
        ref_cohesiveness = cohesiveness(reference)
    result = randomization_test(pooled, cfg, reference=reference)

    # presentation-only: frequency of |diff|, the published histogram shape
    abs_diffs = np.abs(result.null_diffs)
    counts, edges = np.histogram(abs_diffs, bins=histogram_bins)
    _write_csv(
        out_dir / "null_histogram.csv",
        ["bin_left", "bin_right", "count"],
        [[float(edges[i]), float(edges[i + 1]), int(counts[i])] for i in range(len(counts))],
    )
    payload = {
        "session": header["session"],
        "n_points": pooled.n,
        "focus_cohesiveness": cohesiveness(pooled),
        "reference_cohesiveness": ref_cohesiveness,
        "random_focus_diff": result.random_focus_diff,
        "null_mean": result.null_mean,
        "null_std": result.null_std,
        "z": result.z,
        "p": result.p,
        "reject_null": result.reject_null,
        "empirical_tail": result.empirical_tail,
        "trials": cfg.trials,
        "sample_size": cfg.sample_size,
        "seed": cfg.seed,
        "corrupt_lines": corrupt,
    }
    _write_json(out_dir / "randomization.json", payload)
    return payload


def analyze_dbscan(record_path: str | Path, out_dir: Path) -> dict[str, Any]:
    header, entries, corrupt, config = _load(record_path)
    points = admitted_points(entries)
    rows = []
    for w in window_stream(points, config.window):
        if w.n == 0:
            rows.append([int(w.window_start), int(w.window_end), 0, 0, 0, "", ""])
            continue
        result = dbscan(w, config.clustering)
        rows.append(
            [
                int(w.window_start),
                int(w.window_end),
                w.n,
                result.n_clusters,
                result.noise_count,
                result.eps_used,
                ";".join(str(s) for s in result.cluster_sizes),
            ]
        )
    _write_csv(
        out_dir / "dbscan_windows.csv",
        ["start_ms", "end_ms", "n_points", "n_clusters", "noise", "eps", "cluster_sizes"],
        rows,
    )
    pooled = GazeDistribution.pooled(points)
    pooled_summary: dict[str, Any] = {"n_points": pooled.n}
    if pooled.n:
        result = dbscan(pooled, config.clustering)
        _write_csv(
            out_dir / "dbscan_pooled_labels.csv",
            ["index", "x", "y", "label"],
            [
                [i, p.x, p.y, int(result.labels[i])]
                for i, p in enumerate(pooled.points)
            ],
        )
        pooled_summary.update(
            n_clusters=result.n_clusters,
            cluster_sizes=list(result.cluster_sizes),
            noise=result.noise_count,
            eps=result.eps_used,
            auto_scaled=result.auto_scaled,
        )
    payload = {
        "session": header["session"],
        "windows": len(rows),
        "pooled": pooled_summary,
        "corrupt_lines": corrupt,
    }
    _write_json(out_dir / "dbscan.json", payload)
    return payload


def analyze_heatmap(record_path: str | Path, out_dir: Path) -> dict[str, Any]:
    header, entries, corrupt, config = _load(record_path)
    points = admitted_points(entries)
    lines = []
    for w in window_stream(points, config.window):
        grid = bin_points(w, config.heatmap_rows, config.heatmap_cols)
        lines.append(
            json.dumps(
                {
                    "start_ms": int(w.window_start),
                    "end_ms": int(w.window_end),
                    **grid.to_payload(),
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    (out_dir / "heatmap.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {"session": header["session"], "windows": len(lines), "corrupt_lines": corrupt}


def analyze_score_series(record_path: str | Path, out_dir: Path) -> dict[str, Any]:
    header, entries, corrupt, _ = _load(record_path)
    _, events = replay_session(header, entries)
    rows = [
        [
            int(e.start_ms),
            int(e.end_ms),
            e.score.n_points,
            e.score.value,
            e.score.n_clusters,
            e.score.clustered_fraction,
            e.score.concentration,
            int(e.alert),
            int(e.error),
        ]
        for e in events
    ]
    _write_csv(
        out_dir / "score_series.csv",
        [
            "start_ms",
            "end_ms",
            "n_points",
            "score",
            "n_clusters",
            "clustered_fraction",
            "concentration",
            "alert",
            "error",
        ],
        rows,
    )
    return {"session": header["session"], "windows": len(rows), "corrupt_lines": corrupt}


def analyze(
    record_path: str | Path,
    analysis: str,
    out_dir: str | Path,
    **kwargs: Any,
) -> dict[str, Any]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if analysis == "cohesiveness":
        return analyze_cohesiveness(record_path, out)
    if analysis == "randomization-test":
        return analyze_randomization(record_path, out, **kwargs)
    if analysis == "dbscan":
        return analyze_dbscan(record_path, out)
    if analysis == "heatmap":
        return analyze_heatmap(record_path, out)
    if analysis == "score-series":
        return analyze_score_series(record_path, out)
    raise ConfigError(f"unknown analysis {analysis!r}; pick one of {ANALYSES}")
