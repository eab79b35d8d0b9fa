"""Gateway surface over a replay-wired orchestrator."""

import pytest
from fastapi.testclient import TestClient

from repoassist.gateway import make_gateway_app, sampling_presets_from_fixture
from repoassist.replay import ReplayRig

from conftest import FIXTURE_REPO, FIXTURES, SCENARIOS


@pytest.fixture(scope="module")
def rig(tmp_path_factory):
    with ReplayRig(SCENARIOS, FIXTURE_REPO, tmp_path_factory.mktemp("runs")) as rig:
        yield rig


@pytest.fixture(scope="module")
def client(rig):
    presets = sampling_presets_from_fixture(FIXTURES / "table3_sampling.json")
    return TestClient(make_gateway_app(rig.orchestrator, presets))


def test_healthz(client):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_presets_include_all_table3_rows(client):
    presets = client.get("/presets").json()
    assert len(presets) == 16  # 15 sweep rows + the model-sweep preset
    assert presets["Default"] == {"temperature": 1.0, "top_p": 1.0, "min_p": 0.0}
    assert presets["temp 0.5 + min_p 0.3"] == {"temperature": 0.5, "top_p": 1.0, "min_p": 0.3}
    assert presets["model sweep"] == {"temperature": 0.5, "top_p": 0.95, "min_p": 0.0}


def test_create_session_with_preset(client):
    resp = client.post("/sessions", json={"model_id": "scripted-model",
                                          "preset": "temp 0.5 + min_p 0.3"})
    assert resp.status_code == 200
    view = resp.json()
    assert view["sampling"] == {"temperature": 0.5, "top_p": 1.0, "min_p": 0.3}
    assert view["inventory_loaded"] is False
    assert view["messages"][0]["role"] == "system"


def test_invalid_sampling_rejected(client):
    resp = client.post("/sessions", json={
        "model_id": "scripted-model",
        "sampling": {"temperature": 1.0, "top_p": 0.0, "min_p": 0.0},
    })
    assert resp.status_code == 422


def test_unknown_session_is_404(client):
    assert client.get("/sessions/nope").status_code == 404
    assert client.get("/sessions/nope/events").status_code == 404
    assert client.post("/sessions/nope/messages", json={"text": "x"}).status_code == 404


def test_create_session_with_scenario_binding(client):
    resp = client.post("/sessions", json={"model_id": "scripted-model",
                                          "scenario": "doc-only"})
    assert resp.status_code == 200
    sid = resp.json()["session_id"]
    turn = client.post(f"/sessions/{sid}/messages", json={
        "text": "Ships are currently rendered as boxes, how do I add models?",
    })
    assert turn.status_code == 200
    assert turn.json()["tool_trace"] == []


def test_full_turn_and_event_order(client, rig):
    # bind the session to the menu-toggle scenario through the orchestrator
    session = rig.orchestrator.create_session(
        "scripted-model", session_id="gw-turn",
        request_extra={"scenario": "menu-toggle"},
    )
    resp = client.post("/sessions/gw-turn/messages",
                       json={"text": "How can I implement background music in the game?"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["text"].startswith("Use the dedicated music path")
    assert [t["tool_name"] for t in body["tool_trace"]] == ["load_battleship_json"]
    assert len(body["retrieved"]) == 4
    scores = [c["score"] for c in body["retrieved"]]
    assert scores == sorted(scores, reverse=True)

    events = client.get("/sessions/gw-turn/events").json()["events"]
    assert [e["event_id"] for e in events] == list(range(1, len(events) + 1))
    assert [e["kind"] for e in events] == [
        "user_prompt", "retrieval", "model_request", "tool_call",
        "tool_result", "model_request", "model_response",
    ]

    view = client.get("/sessions/gw-turn").json()
    assert view["inventory_loaded"] is True
    roles = [m["role"] for m in view["messages"]]
    assert roles == ["system", "user", "assistant", "tool", "assistant"]
