"""Pipeline behavior over the scripted endpoint: scenario traces, audit event
walks, the one-shot inventory gate, loop budget, and request assembly."""

import json

import pytest
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from repoassist.audit import AuditLog, replay_clock
from repoassist.chatclient import ChatCompletionsClient
from repoassist.errors import (
    InvalidSampling,
    ToolLoopBudgetExceeded,
    TurnInFlight,
    UnknownModel,
)
from repoassist.orchestrator import Orchestrator, SamplingConfig
from repoassist.replay import ReplayRig
from repoassist.testing.serving import BackgroundServer
from repoassist.tools import ToolCall, build_repo_tool_registry
from repoassist.repoaccess import open_local_repo

from conftest import FIXTURE_REPO, SCENARIOS


@pytest.fixture(scope="module")
def rig(tmp_path_factory):
    with ReplayRig(SCENARIOS, FIXTURE_REPO, tmp_path_factory.mktemp("runs")) as rig:
        yield rig


# --- sampling config ---


def test_sampling_defaults():
    assert SamplingConfig() == SamplingConfig(1.0, 1.0, 0.0)


def test_model_sweep_preset_accepted():
    cfg = SamplingConfig(0.5, 0.95, 0.0)
    assert cfg.as_dict() == {"temperature": 0.5, "top_p": 0.95, "min_p": 0.0}


@pytest.mark.parametrize("kwargs", [
    {"top_p": 0.0},
    {"top_p": 1.2},
    {"min_p": 1.0},
    {"min_p": -0.1},
    {"temperature": -0.5},
])
def test_invalid_sampling_rejected(kwargs):
    with pytest.raises(InvalidSampling):
        SamplingConfig(**kwargs)


def test_unknown_model_rejected(tmp_path):
    repo = open_local_repo(FIXTURE_REPO)
    orch = Orchestrator(
        client=ChatCompletionsClient("http://127.0.0.1:9"),
        audit=AuditLog(tmp_path),
        registry_factory=lambda: build_repo_tool_registry(repo),
        known_models={"listed-model"},
    )
    with pytest.raises(UnknownModel):
        orch.create_session("unlisted-model")
    orch.create_session("listed-model")


# --- scenario runs ---


def test_menu_toggle_first_turn_event_walk(rig):
    outcome = rig.run_scenario("menu-toggle", session_id="mt-walk")
    events = rig.audit.events("mt-walk")
    first_turn = [e.kind for e in events[:7]]
    assert first_turn == [
        "user_prompt", "retrieval", "model_request", "tool_call",
        "tool_result", "model_request", "model_response",
    ]
    assert events[3].payload["tool_name"] == "load_battleship_json"
    assert events[4].payload["is_error"] is False


def test_menu_toggle_second_turn_trace_order(rig):
    outcome = rig.run_scenario("menu-toggle", session_id="mt-trace")
    second_turn = outcome.turns[1]
    names = [step.call.tool_name for step in second_turn.tool_trace]
    assert names == ["find_class_path", "get_content_from_file"]
    find_result = json.loads(second_turn.tool_trace[0].result)
    assert find_result["paths"] == ["src/pp/battleship/Menu.java"]
    fetched = json.loads(second_turn.tool_trace[1].result)
    assert fetched["path"] == "src/pp/battleship/Menu.java"
    assert "toggleMusic" in fetched["text"]
    assert second_turn.text
    events = rig.audit.events("mt-trace")
    tool_events = [e for e in events if e.kind == "tool_call"]
    order = [e.payload["tool_name"] for e in tool_events]
    assert order.index("find_class_path") < order.index("get_content_from_file")


def test_doc_only_has_zero_tool_calls_and_retrieval(rig):
    outcome = rig.run_scenario("doc-only", session_id="do-1")
    turn = outcome.turns[0]
    assert turn.tool_trace == []
    assert len(turn.retrieved) > 0
    assert any("architecture.md" == sc.chunk.source for sc in turn.retrieved)
    kinds = [e.kind for e in rig.audit.events("do-1")]
    assert kinds == ["user_prompt", "retrieval", "model_request", "model_response"]


def test_method_check_order_and_one_shot_gate(rig):
    rig.run_scenario("method-check", session_id="mc-1")
    events = rig.audit.events("mc-1")
    tool_calls = [e for e in events if e.kind == "tool_call"]
    names = [e.payload["tool_name"] for e in tool_calls]
    assert names == [
        "load_battleship_json", "get_methods", "get_content_from_file",
        "load_battleship_json",
    ]
    assert names.index("get_methods") < names.index("get_content_from_file")
    results = [e for e in events if e.kind == "tool_result"]
    load_results = [e for e in results if e.payload["tool_name"] == "load_battleship_json"]
    assert [e.payload["is_error"] for e in load_results] == [False, True]
    assert "already loaded" in load_results[1].payload["result"]
    methods_payload = json.loads(
        next(e for e in results if e.payload["tool_name"] == "get_methods").payload["result"]
    )
    assert "toggleMusic" in [m["name"] for m in methods_payload["methods"]]


def test_replay_is_deterministic_across_rigs(tmp_path):
    hashes = {}
    for attempt in ("one", "two"):
        with ReplayRig(SCENARIOS, FIXTURE_REPO, tmp_path / attempt) as rig:
            for scenario_id in ("menu-toggle", "doc-only", "method-check"):
                outcome = rig.run_scenario(scenario_id)
                hashes.setdefault(scenario_id, []).append(outcome.content_hash)
    for scenario_id, (first, second) in hashes.items():
        assert first == second, f"ledger hash drifted for {scenario_id}"


def test_sampling_echo_round_trip(rig):
    cfg = SamplingConfig(0.3, 1.0, 0.3)
    outcome = rig.run_scenario("doc-only", session_id="echo-1", sampling=cfg)
    assert outcome.turns[0].sampling_echo == {
        "temperature": 0.3, "top_p": 1.0, "min_p": 0.3,
    }


def test_second_send_while_turn_in_flight_rejected(rig):
    session = rig.orchestrator.create_session("scripted-model", session_id="busy-1")
    session._turn_lock.acquire()
    try:
        with pytest.raises(TurnInFlight):
            rig.orchestrator.send_user_message(session, "anything")
    finally:
        session._turn_lock.release()


def test_execute_tool_call_direct_inventory_gate(rig):
    session = rig.orchestrator.create_session("scripted-model", session_id="gate-1")
    first = rig.orchestrator.execute_tool_call(
        session, ToolCall("c1", "load_battleship_json", {})
    )
    assert json.loads(first)["classes"] == 12
    from repoassist.errors import ToolExecutionError
    with pytest.raises(ToolExecutionError):
        rig.orchestrator.execute_tool_call(
            session, ToolCall("c2", "load_battleship_json", {})
        )


def test_malformed_tool_arguments_become_error_result(tmp_path):
    scenario = {
        "scenario_id": "bad-args",
        "prompts": ["please check the Menu class"],
        "turns": [
            {"match": {"kind": "user_contains", "value": "Menu"},
             "respond": {"tool_calls": [{"name": "find_class_path", "arguments": {}}]}},
            {"match": {"kind": "tool_result_for", "value": "find_class_path"},
             "respond": {"content": "recovered"}},
        ],
    }
    scen_dir = tmp_path / "scen"
    scen_dir.mkdir()
    (scen_dir / "bad_args.json").write_text(json.dumps(scenario))
    with ReplayRig(scen_dir, FIXTURE_REPO, tmp_path / "runs") as rig:
        outcome = rig.run_scenario("bad-args")
        step = outcome.turns[0].tool_trace[0]
        assert step.is_error
        assert "class_name" in step.result
        assert outcome.turns[0].text == "recovered"


def test_tool_loop_budget_enforced(tmp_path):
    turns = [{
        "match": {"kind": "user_contains", "value": "loop"},
        "respond": {"tool_calls": [{"name": "find_class_path",
                                    "arguments": {"class_name": "Menu"}}]},
    }]
    for _ in range(9):
        turns.append({
            "match": {"kind": "tool_result_for", "value": "find_class_path"},
            "respond": {"tool_calls": [{"name": "find_class_path",
                                        "arguments": {"class_name": "Menu"}}]},
        })
    scenario = {"scenario_id": "loopy", "prompts": ["loop forever"], "turns": turns}
    scen_dir = tmp_path / "scen"
    scen_dir.mkdir()
    (scen_dir / "loopy.json").write_text(json.dumps(scenario))
    with ReplayRig(scen_dir, FIXTURE_REPO, tmp_path / "runs") as rig:
        with pytest.raises(ToolLoopBudgetExceeded):
            rig.run_scenario("loopy")
        events = rig.audit.events("loopy")
        tool_rounds = sum(1 for e in events if e.kind == "tool_call")
        assert tool_rounds <= 8
        assert events[-1].kind == "error"


def test_ledger_pairs_every_dispatched_tool_call(tmp_path):
    """Cross-walk: every step in the orchestrator's turn traces has exactly one
    (tool_call, tool_result) pair in the ledger, matched by call id."""
    with ReplayRig(SCENARIOS, FIXTURE_REPO, tmp_path / "runs") as rig:
        for scenario_id in ("menu-toggle", "doc-only", "method-check"):
            outcome = rig.run_scenario(scenario_id)
            dispatched = [
                step.call.call_id for turn in outcome.turns for step in turn.tool_trace
            ]
            events = rig.audit.events(scenario_id)
            call_ids = [e.payload["call_id"] for e in events if e.kind == "tool_call"]
            result_ids = [e.payload["call_id"] for e in events if e.kind == "tool_result"]
            assert call_ids == dispatched
            assert result_ids == dispatched
            by_id = {e.payload["call_id"]: e for e in events if e.kind == "tool_call"}
            for e in events:
                if e.kind == "tool_result":
                    assert e.event_id > by_id[e.payload["call_id"]].event_id


def test_every_model_request_links_exactly_one_trace(tmp_path):
    with ReplayRig(SCENARIOS, FIXTURE_REPO, tmp_path / "runs") as rig:
        rig.run_scenario("menu-toggle")
        request_ids = [
            e.event_id for e in rig.audit.events("menu-toggle")
            if e.kind == "model_request"
        ]
        linked = [t.linked_event_id for t in rig.trace_store.by_direction("to_model")]
        assert sorted(linked) == sorted(request_ids)
        assert len(set(linked)) == len(linked)


def test_tool_error_records_linked_error_event(tmp_path):
    with ReplayRig(SCENARIOS, FIXTURE_REPO, tmp_path / "runs") as rig:
        rig.run_scenario("method-check")
        events = rig.audit.events("method-check")
        errors = [e for e in events if e.kind == "error"]
        assert len(errors) == 1
        linked = errors[0].payload["linked_event_id"]
        call_event = next(e for e in events if e.event_id == linked)
        assert call_event.kind == "tool_call"
        assert call_event.payload["tool_name"] == "load_battleship_json"


def test_provider_404_keeps_trace_and_links_error_event(tmp_path):
    """A provider that 404s a file still listed in the pinned tree: the raw
    trace is retained and a linked error audit event lands in the ledger."""
    import shutil

    repo_copy = tmp_path / "repo"
    shutil.copytree(FIXTURE_REPO, repo_copy)
    with ReplayRig(SCENARIOS, repo_copy, tmp_path / "runs",
                   use_remote_repo=True) as rig:
        session = rig.orchestrator.create_session("scripted-model", session_id="p404")
        rig.repo.list_tree()  # pin the tree before the file disappears
        (repo_copy / "docs" / "audio.md").unlink()
        step = rig.orchestrator._dispatch(
            session, ToolCall("c1", "get_content_from_file", {"path": "docs/audio.md"})
        )
        assert step.is_error
        statuses = [t.status for t in rig.trace_store.by_direction("to_provider")]
        assert 404 in statuses
        events = rig.audit.events("p404")
        assert [e.kind for e in events] == ["tool_call", "tool_result", "error"]
        assert events[2].payload["linked_event_id"] == events[0].event_id


def test_port_in_use_is_reported(tmp_path):
    from repoassist.errors import PortInUse
    from repoassist.scripted import load_scenarios, make_scripted_app
    from repoassist.testing.serving import BackgroundServer

    app = make_scripted_app(load_scenarios(SCENARIOS))
    with BackgroundServer(app) as server:
        with pytest.raises(PortInUse):
            BackgroundServer(app, port=server.port)


def test_response_language_knob(rig):
    session = rig.orchestrator.create_session(
        "scripted-model", session_id="lang-1", response_language="German",
    )
    assert "Answer in German." in session.messages[0].content
    default = rig.orchestrator.create_session("scripted-model", session_id="lang-2")
    assert "Answer in English." in default.messages[0].content


# --- request assembly ---


def test_assemble_request_injects_context_into_latest_user_message(rig):
    session = rig.orchestrator.create_session(
        "scripted-model", sampling=SamplingConfig(0.3, 1.0, 0.3), session_id="asm-1"
    )
    from repoassist.orchestrator import ChatMessage

    session.messages.append(ChatMessage("user", "first question"))
    session.messages.append(ChatMessage("assistant", "first answer"))
    session.messages.append(ChatMessage("user", "second question"))
    retrieved = rig.knowledge_base.query("background music", k=2)
    request = rig.orchestrator.assemble_request(session, retrieved)

    assert request["temperature"] == 0.3
    assert request["top_p"] == 1.0
    assert request["min_p"] == 0.3
    assert request["tool_choice"] == "auto"
    assert [t["function"]["name"] for t in request["tools"]] == [
        "find_class_path", "get_content_from_file", "get_methods", "load_battleship_json",
    ]
    wire = request["messages"]
    assert wire[0]["role"] == "system"
    user_messages = [m for m in wire if m["role"] == "user"]
    assert "[BEGIN RETRIEVED CONTEXT]" not in user_messages[0]["content"]
    last = user_messages[-1]["content"]
    assert last.startswith("second question")
    assert "[BEGIN RETRIEVED CONTEXT]" in last and "[END RETRIEVED CONTEXT]" in last
    first_chunk, second_chunk = retrieved[0].chunk.text, retrieved[1].chunk.text
    assert last.index(first_chunk) < last.index(second_chunk)


def test_assemble_request_without_retrieval_has_no_delimiters(rig):
    session = rig.orchestrator.create_session("scripted-model", session_id="asm-2")
    from repoassist.orchestrator import ChatMessage

    session.messages.append(ChatMessage("user", "plain question"))
    request = rig.orchestrator.assemble_request(session, [])
    assert "[BEGIN RETRIEVED CONTEXT]" not in json.dumps(request)


# --- min_p downgrade path ---


def _minp_rejecting_app():
    app = FastAPI()

    @app.post("/v1/chat/completions")
    async def chat(request: Request):
        body = await request.json()
        if "min_p" in body:
            return JSONResponse({"error": "unknown field: min_p"}, status_code=400)
        return JSONResponse({
            "id": "r1", "object": "chat.completion", "created": 0,
            "model": body.get("model", "m"),
            "choices": [{"index": 0,
                         "message": {"role": "assistant", "content": "ok without min_p"},
                         "finish_reason": "stop"}],
        })

    return app


def test_min_p_stripped_and_logged_when_endpoint_rejects(tmp_path):
    with BackgroundServer(_minp_rejecting_app()) as server:
        audit = AuditLog(tmp_path, clock=replay_clock)
        repo = open_local_repo(FIXTURE_REPO)
        orch = Orchestrator(
            client=ChatCompletionsClient(server.base_url),
            audit=audit,
            registry_factory=lambda: build_repo_tool_registry(repo),
        )
        session = orch.create_session(
            "any-model", sampling=SamplingConfig(1.0, 1.0, 0.3), session_id="strip-1"
        )
        result = orch.send_user_message(session, "hello")
        assert result.text == "ok without min_p"
        kinds = [e.kind for e in audit.events("strip-1")]
        assert kinds == [
            "user_prompt", "retrieval", "model_request", "error",
            "model_request", "model_response",
        ]
        second_request = audit.events("strip-1")[4].payload["request"]
        assert "min_p" not in second_request
