"""End-to-end tests against a real uvicorn process over sockets."""

import json
import signal
import socket
import subprocess
import sys
import time
from pathlib import Path

import httpx
import pytest

from classgaze.service.config import session_config_from_dict
from classgaze.service.records import read_record
from classgaze.sim.runner import run_scenario
from classgaze.sim.scenario import Episode, FocusRegion, RegionFocus, ScenarioScript, StudentProfile

SHORT_WINDOW = {"window": {"window_len_ms": 600, "stride_ms": 200}, "clustering": {"min_samples": 10}}


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture
def server(tmp_path):
    port = free_port()
    record_dir = tmp_path / "records"
    proc = subprocess.Popen(
        [
            sys.executable,
            "-m",
            "classgaze.cli",
            "serve",
            "--port",
            str(port),
            "--record-dir",
            str(record_dir),
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        deadline = time.monotonic() + 15
        while time.monotonic() < deadline:
            try:
                if httpx.get(base + "/healthz", timeout=0.5).status_code == 200:
                    break
            except httpx.TransportError:
                time.sleep(0.1)
        else:
            raise RuntimeError("server did not come up")
        yield base, proc, record_dir
    finally:
        if proc.poll() is None:
            proc.terminate()
            proc.wait(timeout=10)


class TestLiveServer:
    def test_healthz_ok(self, server):
        base, _, _ = server
        assert httpx.get(base + "/healthz").json() == {"status": "ok"}

    def test_full_class_liveness_and_privacy(self, server):
        base, proc, record_dir = server
        script = ScenarioScript(
            timeline=(Episode(2_400, RegionFocus(FocusRegion(5))),),
            roster=tuple(StudentProfile() for _ in range(31)),
            seed=99,
        )
        summary = run_scenario(
            script,
            endpoint=base,
            session_config=session_config_from_dict({**SHORT_WINDOW, "seed": 99}),
            settle_s=1.5,
        )
        assert summary.client_failures == 0
        assert summary.accepted > 31 * 2_400 / 1000 * 30 * 0.9
        # liveness: one event per stride while data flowed
        assert len(summary.events) >= 8
        starts = [e["start_ms"] for e in summary.events]
        assert starts == sorted(starts)
        strides = {b - a for a, b in zip(starts, starts[1:])}
        assert strides <= {200}
        # privacy: no student token anywhere in instructor events
        text = json.dumps(summary.events)
        assert "stu-" not in text

        # SIGTERM flushes a well-formed close line into the record
        proc.send_signal(signal.SIGTERM)
        proc.wait(timeout=10)
        records = list(Path(record_dir).glob("*.ndjson"))
        assert len(records) == 1
        header, entries, corrupt = read_record(records[0])
        assert corrupt == 0
        assert entries[-1]["type"] == "close"
        assert any(e["type"] == "event" for e in entries)
