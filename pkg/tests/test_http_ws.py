import json
import time

import pytest
from fastapi.testclient import TestClient

from classgaze.service.app import create_app
from classgaze.service.config import ServiceConfig

FAST_SESSION = {
    "window": {"window_len_ms": 600, "stride_ms": 200},
    "clustering": {"min_samples": 10},
}


@pytest.fixture
def client():
    app = create_app(ServiceConfig())
    with TestClient(app) as c:
        yield c


def create_session(client, body=None):
    resp = client.post("/sessions", json=body if body is not None else FAST_SESSION)
    assert resp.status_code == 201
    return resp.json()


class TestHttp:
    def test_healthz(self, client):
        assert client.get("/healthz").json() == {"status": "ok"}

    def test_create_returns_distinct_sessions(self, client):
        a = create_session(client)
        b = create_session(client)
        assert a["session_id"] != b["session_id"]
        assert a["instructor_key"] != b["instructor_key"]

    def test_create_with_defaults(self, client):
        created = create_session(client, body={})
        key = created["instructor_key"]
        summary = client.get(
            f"/sessions/{created['session_id']}/summary", headers={"x-instructor-key": key}
        ).json()
        assert summary["config"]["window"] == {"window_len_ms": 10_000, "stride_ms": 2_000}
        assert summary["config"]["clustering"]["min_samples"] == 100
        assert summary["threshold"] == 0.5

    def test_create_rejects_bad_window(self, client):
        resp = client.post(
            "/sessions", json={"window": {"window_len_ms": 1000, "stride_ms": 2000}}
        )
        assert resp.status_code == 400
        assert "stride_ms" in resp.json()["error"]

    def test_join_and_roster_31(self, client):
        created = create_session(client)
        tokens = {
            client.post(f"/sessions/{created['session_id']}/join").json()["token"]
            for _ in range(31)
        }
        assert len(tokens) == 31
        summary = client.get(
            f"/sessions/{created['session_id']}/summary",
            headers={"x-instructor-key": created["instructor_key"]},
        ).json()
        assert summary["roster_size"] == 31

    def test_join_unknown_session(self, client):
        assert client.post("/sessions/ses-missing/join").status_code == 404

    def test_join_closed_session(self, client):
        created = create_session(client)
        sid, key = created["session_id"], created["instructor_key"]
        assert (
            client.post(f"/sessions/{sid}/close", headers={"x-instructor-key": key}).status_code
            == 200
        )
        assert client.post(f"/sessions/{sid}/join").status_code == 409

    def test_summary_requires_key(self, client):
        created = create_session(client)
        sid = created["session_id"]
        assert client.get(f"/sessions/{sid}/summary").status_code == 401
        assert (
            client.get(
                f"/sessions/{sid}/summary", headers={"x-instructor-key": "ikey-wrong"}
            ).status_code
            == 401
        )


class TestStudentSocket:
    def test_gaze_ack_and_admission(self, client):
        created = create_session(client)
        sid = created["session_id"]
        token = client.post(f"/sessions/{sid}/join").json()["token"]
        with client.websocket_connect(f"/ws/student/{sid}") as ws:
            ws.send_text(
                json.dumps(
                    {
                        "type": "gaze",
                        "token": token,
                        "samples": [[0, 0.5, 0.5], [10, 1.05, 0.5], [20, 1.5, 0.5]],
                    }
                )
            )
            ack = json.loads(ws.receive_text())
        assert ack == {"type": "ack", "accepted": 2, "dropped": 1}

    def test_invalid_token_closed(self, client):
        created = create_session(client)
        sid = created["session_id"]
        with client.websocket_connect(f"/ws/student/{sid}") as ws:
            ws.send_text(json.dumps({"type": "gaze", "token": "stu-fake", "samples": []}))
            err = json.loads(ws.receive_text())
            assert err["type"] == "error"

    def test_malformed_frame_reported(self, client):
        created = create_session(client)
        sid = created["session_id"]
        token = client.post(f"/sessions/{sid}/join").json()["token"]
        with client.websocket_connect(f"/ws/student/{sid}") as ws:
            ws.send_text("not json")
            assert json.loads(ws.receive_text())["type"] == "error"
            ws.send_text(json.dumps({"type": "gaze", "token": token, "samples": []}))
            assert json.loads(ws.receive_text())["type"] == "ack"


class TestInstructorSocket:
    def test_bad_key_rejected(self, client):
        created = create_session(client)
        sid = created["session_id"]
        from starlette.websockets import WebSocketDisconnect

        with pytest.raises(WebSocketDisconnect):
            with client.websocket_connect(f"/ws/instructor/{sid}?key=ikey-bad") as ws:
                ws.receive_text()

    def test_threshold_roundtrip(self, client):
        created = create_session(client)
        sid, key = created["session_id"], created["instructor_key"]
        with client.websocket_connect(f"/ws/instructor/{sid}?key={key}") as ws:
            ws.send_text(json.dumps({"type": "set_threshold", "value": 0.3}))
            msg = json.loads(ws.receive_text())
            assert msg == {"type": "threshold", "session": sid, "value": 0.3}
            # idempotent resubmit acks again
            ws.send_text(json.dumps({"type": "set_threshold", "value": 0.3}))
            assert json.loads(ws.receive_text())["value"] == 0.3
            # out-of-range rejected server-side
            ws.send_text(json.dumps({"type": "set_threshold", "value": 1.2}))
            assert json.loads(ws.receive_text())["type"] == "error"
        summary = client.get(
            f"/sessions/{sid}/summary", headers={"x-instructor-key": key}
        ).json()
        assert summary["threshold"] == 0.3

    def test_live_window_events_flow(self, client):
        created = create_session(client)
        sid, key = created["session_id"], created["instructor_key"]
        token = client.post(f"/sessions/{sid}/join").json()["token"]
        samples = [[i, 0.5, 0.5] for i in range(30)]
        with client.websocket_connect(f"/ws/instructor/{sid}?key={key}") as iws:
            with client.websocket_connect(f"/ws/student/{sid}") as sws:
                deadline = time.monotonic() + 5.0
                got = None
                while time.monotonic() < deadline:
                    sws.send_text(
                        json.dumps({"type": "gaze", "token": token, "samples": samples})
                    )
                    sws.receive_text()
                    try:
                        got = json.loads(iws.receive_text())
                        break
                    except Exception:  # pragma: no cover
                        break
                assert got is not None
                assert got["type"] == "window"
                assert got["session"] == sid
                assert got["heatmap"]["rows"] == 32
                assert got["n_points"] > 0
                assert isinstance(got["score"], float)
                assert got["alert"] is False
