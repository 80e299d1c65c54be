"""Operator entry point: serve, simulate, analyze, replay.

Exit codes: 0 ok, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .analysis import ANALYSES, analyze
from .errors import ClassGazeError, ConfigError

EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(EXIT_CONFIG if isinstance(exc, ConfigError) else EXIT_RUNTIME)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Class-attention analytics over anonymized gaze streams."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None, help="YAML service config.")
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--record-dir", type=click.Path(), default=None, help="Directory for session records.")
def serve(config_path, host, port, record_dir) -> None:
    """Run the session service until interrupted."""
    import uvicorn

    from .service.app import create_app
    from .service.config import load_service_config

    try:
        cfg = load_service_config(
            config_path,
            host=host,
            port=port,
            record_dir=Path(record_dir) if record_dir else None,
        )
    except ConfigError as exc:
        _fail(exc)
    app = create_app(cfg)
    try:
        uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
    except (OSError, SystemExit) as exc:
        if isinstance(exc, SystemExit) and not exc.code:
            return
        _fail(RuntimeError(f"server failed to start: {exc}"))


@main.command()
@click.argument("script_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--endpoint", default=None, help="Server base URL; omit to run in-process.")
@click.option("--out", "record_out", type=click.Path(), default=None, help="Replay record path.")
@click.option("--summary", "summary_out", type=click.Path(), default=None, help="Summary JSON path.")
@click.option("--seed", type=int, default=None, help="Override the script seed.")
@click.option("--time-scale", type=float, default=1.0, help="Socket mode pacing speed-up.")
@click.option("--session", "session_id", default=None, help="Stream into an existing session.")
@click.option("--instructor-key", default=None, help="Key for summary/event collection.")
def simulate(
    script_path, endpoint, record_out, summary_out, seed, time_scale, session_id, instructor_key
) -> None:
    """Run a scenario script against the pipeline and summarize it."""
    from .sim.runner import run_scenario
    from .sim.scenario import load_script

    try:
        script = load_script(script_path)
        if seed is not None:
            from dataclasses import replace

            script = replace(script, seed=seed)
        summary = run_scenario(
            script,
            endpoint=endpoint,
            record_path=record_out,
            time_scale=time_scale,
            session_id=session_id,
            instructor_key=instructor_key,
        )
    except ClassGazeError as exc:
        _fail(exc)
    text = json.dumps(summary.to_dict(), sort_keys=True, indent=2)
    if summary_out:
        Path(summary_out).write_text(text + "\n", encoding="utf-8")
        click.echo(f"summary written to {summary_out}")
    else:
        click.echo(text)


@main.command("analyze")
@click.argument("record_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--analysis", "analysis_name", type=click.Choice(ANALYSES), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--trials", type=int, default=None, help="Randomization trials (default 5000).")
@click.option("--sample-size", type=int, default=None, help="Uniform sample size (default 5000).")
@click.option("--seed", type=int, default=None, help="Override the record seed for analyses.")
@click.option(
    "--reference",
    "reference_record",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Recorded sample to diff against (randomization-test only).",
)
def analyze_cmd(record_path, analysis_name, out_dir, trials, sample_size, seed, reference_record):
    """Emit plot-ready data tables from a session record."""
    kwargs = {}
    if analysis_name == "randomization-test":
        kwargs = {
            "trials": trials,
            "sample_size": sample_size,
            "seed": seed,
            "reference_record": reference_record,
        }
    try:
        result = analyze(record_path, analysis_name, out_dir, **kwargs)
    except (ClassGazeError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(json.dumps(result, sort_keys=True, indent=2))


@main.command()
@click.argument("record_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--verify", is_flag=True, help="Compare regenerated events to recorded ones.")
@click.option("--out", "events_out", type=click.Path(), default=None, help="Write regenerated events.")
def replay(record_path, verify, events_out) -> None:
    """Re-run a record through a fresh engine."""
    from .service.engine import replay_session
    from .service.records import read_record, recorded_events

    try:
        header, entries, corrupt = read_record(record_path)
        engine, events = replay_session(header, entries)
    except (ClassGazeError, ValueError, OSError) as exc:
        _fail(exc)
    regenerated = [e.to_wire() for e in events]
    if events_out:
        Path(events_out).write_text(
            json.dumps(regenerated, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    click.echo(
        json.dumps(
            {
                "session": engine.session_id,
                "windows": len(regenerated),
                "corrupt_lines": corrupt,
            },
            sort_keys=True,
        )
    )
    if verify:
        recorded = recorded_events(entries)
        if recorded == regenerated:
            click.echo(f"verify ok: {len(recorded)} events match")
        else:
            click.echo(
                f"verify FAILED: recorded {len(recorded)} events, "
                f"regenerated {len(regenerated)}; first mismatch at index "
                f"{next((i for i, (a, b) in enumerate(zip(recorded, regenerated)) if a != b), min(len(recorded), len(regenerated)))}",
                err=True,
            )
            sys.exit(EXIT_RUNTIME)


if __name__ == "__main__":
    main()
