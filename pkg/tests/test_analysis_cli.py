import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from classgaze.analysis import analyze
from classgaze.cli import main
from classgaze.errors import ConfigError
from classgaze.sim.runner import run_scenario_in_process
from classgaze.sim.scenario import Episode, FocusRegion, RegionFocus, ScenarioScript, StudentProfile

from conftest import FIXTURE_DIR

FOCUS_TARGET = 0.07365995468797122
RANDOM_TARGET = 0.17023544468407120
DIFF_TARGET = 0.09657548999609998

FOCUS_FIXTURE = FIXTURE_DIR / "focus_region_session.ndjson"
UNIFORM_FIXTURE = FIXTURE_DIR / "uniform_reference.ndjson"


@pytest.fixture(scope="module")
def sim_record(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("records") / "sim.ndjson"
    script = ScenarioScript(
        timeline=(Episode(14_000, RegionFocus(FocusRegion(5))),),
        roster=tuple(StudentProfile() for _ in range(8)),
        seed=31,
    )
    run_scenario_in_process(script, record_path=path)
    return path


class TestAnalyses:
    def test_cohesiveness_fixture_pinned(self, tmp_path):
        result = analyze(FOCUS_FIXTURE, "cohesiveness", tmp_path)
        assert result["pooled_cohesiveness"] == FOCUS_TARGET
        csv = (tmp_path / "cohesiveness.csv").read_text().splitlines()
        assert csv[0] == "start_ms,end_ms,n_points,cohesiveness"
        assert len(csv) > 1

    def test_cohesiveness_uniform_fixture(self, tmp_path):
        result = analyze(UNIFORM_FIXTURE, "cohesiveness", tmp_path)
        assert result["pooled_cohesiveness"] == RANDOM_TARGET
        assert result["pooled_cohesiveness"] == pytest.approx(1 / 6, abs=0.01)

    def test_randomization_fixture_diff_pinned(self, tmp_path):
        result = analyze(
            FOCUS_FIXTURE,
            "randomization-test",
            tmp_path,
            trials=200,
            sample_size=1000,
            reference_record=UNIFORM_FIXTURE,
        )
        assert result["focus_cohesiveness"] == FOCUS_TARGET
        assert result["reference_cohesiveness"] == RANDOM_TARGET
        assert result["random_focus_diff"] == DIFF_TARGET
        assert result["reject_null"] is True
        assert (tmp_path / "null_histogram.csv").exists()

    def test_dbscan_on_attentive_record(self, sim_record, tmp_path):
        result = analyze(sim_record, "dbscan", tmp_path)
        assert result["pooled"]["n_clusters"] == 1
        labels = (tmp_path / "dbscan_pooled_labels.csv").read_text().splitlines()
        assert labels[0] == "index,x,y,label"
        assert len(labels) == result["pooled"]["n_points"] + 1

    def test_heatmap_rows_conserve(self, sim_record, tmp_path):
        analyze(sim_record, "heatmap", tmp_path)
        lines = (tmp_path / "heatmap.jsonl").read_text().splitlines()
        for line in lines:
            obj = json.loads(line)
            assert obj["rows"] == 32 and obj["cols"] == 32
            assert sum(obj["counts"]) >= 0

    def test_score_series_matches_recorded_events(self, sim_record, tmp_path):
        from classgaze.service.records import read_record, recorded_events

        analyze(sim_record, "score-series", tmp_path)
        rows = (tmp_path / "score_series.csv").read_text().splitlines()[1:]
        _, entries, _ = read_record(sim_record)
        events = recorded_events(entries)
        assert len(rows) == len(events)
        for row, event in zip(rows, events):
            cols = row.split(",")
            assert int(cols[0]) == event["start_ms"]
            assert float(cols[3]) == event["score"]

    def test_byte_identical_outputs(self, sim_record, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            analyze(sim_record, "cohesiveness", out)
            analyze(
                sim_record, "randomization-test", out, trials=120, sample_size=500, seed=5
            )
        for name in ("cohesiveness.csv", "cohesiveness.json", "randomization.json", "null_histogram.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_unknown_analysis_rejected(self, sim_record, tmp_path):
        with pytest.raises(ConfigError):
            analyze(sim_record, "nope", tmp_path)


class TestCli:
    def test_simulate_then_analyze_then_replay(self, tmp_path):
        runner = CliRunner()
        script = tmp_path / "scenario.yaml"
        script.write_text(
            "seed: 12\n"
            "roster:\n  - {behavior: attentive, count: 6}\n"
            "timeline:\n  - {duration_ms: 12000, focus: 5}\n"
        )
        record = tmp_path / "run.ndjson"
        summary = tmp_path / "summary.json"
        result = runner.invoke(
            main, ["simulate", str(script), "--out", str(record), "--summary", str(summary)]
        )
        assert result.exit_code == 0, result.output
        data = json.loads(summary.read_text())
        assert data["windows"] > 0
        assert data["alerts"] == []

        out_dir = tmp_path / "analysis"
        result = runner.invoke(
            main,
            ["analyze", str(record), "--analysis", "cohesiveness", "--out", str(out_dir)],
        )
        assert result.exit_code == 0, result.output
        assert (out_dir / "cohesiveness.json").exists()

        result = runner.invoke(main, ["replay", str(record), "--verify"])
        assert result.exit_code == 0, result.output
        assert "verify ok" in result.output

    def test_simulate_bad_script_exits_2(self, tmp_path):
        script = tmp_path / "bad.yaml"
        script.write_text("roster: []\ntimeline: []\n")
        result = CliRunner().invoke(main, ["simulate", str(script)])
        assert result.exit_code == 2

    def test_serve_bad_config_exits_2_naming_field(self, tmp_path):
        cfg = tmp_path / "svc.yaml"
        cfg.write_text("session:\n  window: {window_len_ms: 1000, stride_ms: 5000}\n")
        result = CliRunner().invoke(main, ["serve", "--config", str(cfg)])
        assert result.exit_code == 2
        assert "stride_ms" in result.output

    def test_replay_verify_detects_tampering(self, tmp_path):
        runner = CliRunner()
        script = tmp_path / "scenario.yaml"
        script.write_text(
            "seed: 13\nroster:\n  - {count: 4}\ntimeline:\n  - {duration_ms: 6000, focus: 2}\n"
        )
        record = tmp_path / "run.ndjson"
        assert (
            runner.invoke(main, ["simulate", str(script), "--out", str(record)]).exit_code == 0
        )
        lines = record.read_text().splitlines()
        tampered = []
        for line in lines:
            obj = json.loads(line)
            if obj["type"] == "event":
                obj["event"]["score"] = 0.123
            tampered.append(json.dumps(obj, sort_keys=True, separators=(",", ":")))
        record.write_text("\n".join(tampered) + "\n")
        result = runner.invoke(main, ["replay", str(record), "--verify"])
        assert result.exit_code == 1
        assert "FAILED" in result.output

    def test_analyze_randomization_with_reference_pins_diff(self, tmp_path):
        runner = CliRunner()
        out_dir = tmp_path / "rt"
        result = runner.invoke(
            main,
            [
                "analyze",
                str(FOCUS_FIXTURE),
                "--analysis",
                "randomization-test",
                "--out",
                str(out_dir),
                "--trials",
                "150",
                "--sample-size",
                "500",
                "--reference",
                str(UNIFORM_FIXTURE),
            ],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads((out_dir / "randomization.json").read_text())
        assert payload["random_focus_diff"] == DIFF_TARGET
