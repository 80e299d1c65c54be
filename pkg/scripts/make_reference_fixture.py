#!/usr/bin/env python3
"""Regenerate the pinned reference fixtures under tests/fixtures/.

Two session records are produced:

  focus_region_session.ndjson   pooled gaze of a 31-student class focused
                                on one region; pooled cohesiveness is tuned
                                to FOCUS_TARGET exactly (float64).
  uniform_reference.ndjson      the recorded 5000-point reference sample a
                                focus distribution is diffed against;
                                cohesiveness tuned to RANDOM_TARGET exactly.

Both records store only coordinates strictly inside [0, 1], so replay
admission is the identity and the pinned values survive any replay. The
tuning is a coarse scale about the centroid followed by a fine scan of a
single coordinate; cohesiveness uses exactly-rounded sums, so the stored
constants reproduce bit-for-bit on any platform.

Run from the repository root:  python scripts/make_reference_fixture.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from classgaze.metrics import admit_sample, cohesiveness_of_arrays
from classgaze.seeds import generator_for
from classgaze.service.config import session_config_from_dict
from classgaze.service.records import RecordWriter
from classgaze.sim.generate import batch_stream, generate_stream
from classgaze.sim.scenario import Episode, FocusRegion, RegionFocus, ScenarioScript, StudentProfile

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

FOCUS_TARGET = 0.07365995468797122
RANDOM_TARGET = 0.17023544468407120
DIFF_TARGET = 0.09657548999609998

FOCUS_SEED = 703
UNIFORM_SEED = 1702
FOCUS_REGION = 3


def coh(xy: np.ndarray) -> float:
    return cohesiveness_of_arrays(np.ascontiguousarray(xy[:, 0]), np.ascontiguousarray(xy[:, 1]))


def scale_about_centroid(xy: np.ndarray, s: float) -> np.ndarray:
    c = xy.mean(axis=0)
    return c + s * (xy - c)


def tune_to_target(xy: np.ndarray, target: float) -> np.ndarray:
    """Scale then nudge one coordinate until coh(xy) == target exactly."""
    base = coh(xy)
    if base <= target:
        raise SystemExit(f"base cohesiveness {base} must exceed target {target}")
    lo, hi = 0.5, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if coh(scale_about_centroid(xy, mid)) < target:
            lo = mid
        else:
            hi = mid
    xy = scale_about_centroid(xy, hi)
    assert xy.min() > 0.0 and xy.max() < 1.0, "scaled points must stay strictly inside (0,1)"

    n = xy.shape[0]
    cx = xy[:, 0].mean()
    j = int(np.argmax(np.abs(xy[:, 0] - cx)))
    lever = 2.0 * (xy[j, 0] - cx)
    # one float64 ulp of the result corresponds to this much coordinate motion
    plateau = np.spacing(target) * n / abs(lever)

    work = xy.copy()
    for _ in range(6):
        current = coh(work)
        if current == target:
            return work
        work[j, 0] += n * (target - current) / lever
    for k in range(-4096, 4097):
        candidate = work.copy()
        candidate[j, 0] = work[j, 0] + k * plateau / 8.0
        if coh(candidate) == target:
            assert 0.0 < candidate[j, 0] < 1.0
            return candidate
    raise SystemExit("fine scan failed to pin the target; try another seed")


def admitted_only(raw: list[tuple[float, float, float]]) -> list[tuple[float, float, float]]:
    out = []
    for t, x, y in raw:
        a = admit_sample(x, y)
        if a is not None:
            out.append((t, a[0], a[1]))
    return out


def write_record(path: Path, session_id: str, seed: int, per_token: dict[str, list]) -> None:
    config = session_config_from_dict({"seed": seed})
    writer = RecordWriter(path, session_id, config.to_dict(), seed, wall_ms=0)
    for token in per_token:
        writer.write_join(token, 0.0)
    flushes = []
    for token, samples in per_token.items():
        for flush_t, batch in batch_stream(samples):
            flushes.append((flush_t, token, batch))
    flushes.sort(key=lambda f: (f[0], f[1]))
    last_t = 0.0
    for flush_t, token, batch in flushes:
        writer.write_batch(token, flush_t, [list(s) for s in batch], len(batch), 0)
        last_t = max(last_t, flush_t)
    writer.write_close(last_t, windows=0, skipped=0)


def build_focus_fixture() -> None:
    script = ScenarioScript(
        timeline=(Episode(10_000, RegionFocus(FocusRegion(FOCUS_REGION))),),
        roster=tuple(StudentProfile(mse_target=0.13) for _ in range(31)),
        seed=FOCUS_SEED,
    )
    streams = [admitted_only(s) for s in generate_stream(script)]
    flat = [(i, k) for i, s in enumerate(streams) for k in range(len(s))]
    xy = np.array([[streams[i][k][1], streams[i][k][2]] for i, k in flat])
    # keep everything strictly interior so replay admission is the identity
    xy = np.clip(xy, 1e-9, 1.0 - 1e-9)
    tuned = tune_to_target(xy, FOCUS_TARGET)
    for idx, (i, k) in enumerate(flat):
        t = streams[i][k][0]
        streams[i][k] = (t, float(tuned[idx, 0]), float(tuned[idx, 1]))

    minter_tokens = [f"stu-{i:016x}" for i in range(len(streams))]
    per_token = dict(zip(minter_tokens, streams))
    write_record(
        FIXTURE_DIR / "focus_region_session.ndjson", "ses-focus-fixture", FOCUS_SEED, per_token
    )
    print(f"focus fixture: n={len(xy)} cohesiveness={coh(tuned)!r}")
    assert coh(tuned) == FOCUS_TARGET


def build_uniform_fixture() -> None:
    gen = generator_for(UNIFORM_SEED, 42)
    xy = gen.beta(0.95, 0.95, size=(5000, 2))
    xy = np.clip(xy, 1e-9, 1.0 - 1e-9)
    if coh(xy) <= RANDOM_TARGET:
        raise SystemExit("uniform base sample too tight; adjust beta shape or seed")
    tuned = tune_to_target(xy, RANDOM_TARGET)
    dt = 10_000.0 / 5000.0
    samples = [(i * dt, float(tuned[i, 0]), float(tuned[i, 1])) for i in range(5000)]
    write_record(
        FIXTURE_DIR / "uniform_reference.ndjson",
        "ses-uniform-fixture",
        UNIFORM_SEED,
        {"stu-reference0000": samples},
    )
    print(f"uniform fixture: n=5000 cohesiveness={coh(tuned)!r}")
    assert coh(tuned) == RANDOM_TARGET
    assert RANDOM_TARGET - FOCUS_TARGET == DIFF_TARGET


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    build_focus_fixture()
    build_uniform_fixture()
    print("fixtures written to", FIXTURE_DIR)


if __name__ == "__main__":
    main()
