"""Deterministic OpenAI-compatible endpoint replaying authored scenarios.

Turn selection is stateless: the n-th scripted turn answers the request that
already carries n assistant messages, so identical request sequences always
produce byte-identical responses and concurrent sessions cannot interfere.
Sampling parameters are echoed back in response metadata so tests can prove
the configured values reached the wire.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .docindex import FallbackHashEmbedder
from .errors import ScenarioError
from .orchestrator import CONTEXT_BEGIN

MATCHER_KINDS = ("user_contains", "tool_result_for")


@dataclass(frozen=True)
class ScenarioTurn:
    matcher_kind: str
    matcher_value: str
    content: str | None
    tool_calls: tuple | None  # tuple of (name, arguments-dict)


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    embedding_mode: str
    prompts: tuple[str, ...]
    turns: tuple[ScenarioTurn, ...]


def _parse_turn(raw: dict, index: int, scenario_id: str) -> ScenarioTurn:
    match = raw.get("match", {})
    kind = match.get("kind")
    if kind not in MATCHER_KINDS:
        raise ScenarioError(f"{scenario_id} turn {index}: unknown matcher kind {kind!r}")
    value = match.get("value")
    if not isinstance(value, str) or not value:
        raise ScenarioError(f"{scenario_id} turn {index}: matcher value must be a non-empty string")
    respond = raw.get("respond", {})
    content = respond.get("content")
    tool_calls = respond.get("tool_calls")
    if (content is None) == (tool_calls is None):
        raise ScenarioError(
            f"{scenario_id} turn {index}: respond needs exactly one of content / tool_calls"
        )
    parsed_calls = None
    if tool_calls is not None:
        parsed_calls = tuple(
            (tc["name"], dict(tc.get("arguments", {}))) for tc in tool_calls
        )
    return ScenarioTurn(kind, value, content, parsed_calls)


def load_scenario(path: str | Path) -> Scenario:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    scenario_id = raw.get("scenario_id")
    if not scenario_id:
        raise ScenarioError(f"{path}: missing scenario_id")
    mode = raw.get("embedding_mode", "fallback-hash")
    if mode != "fallback-hash":
        raise ScenarioError(f"{scenario_id}: unsupported embedding_mode {mode!r}")
    turns = [
        _parse_turn(t, i, scenario_id) for i, t in enumerate(raw.get("turns", []))
    ]
    if not turns:
        raise ScenarioError(f"{scenario_id}: scenario has no turns")
    # satisfiability: a tool_result_for matcher needs an earlier scripted call
    seen_tools: set[str] = set()
    for i, turn in enumerate(turns):
        if turn.matcher_kind == "tool_result_for" and turn.matcher_value not in seen_tools:
            raise ScenarioError(
                f"{scenario_id} turn {i}: expects a result for {turn.matcher_value!r} "
                "but no earlier turn issues that tool call"
            )
        if turn.tool_calls:
            seen_tools.update(name for name, _ in turn.tool_calls)
    prompts = tuple(raw.get("prompts", []))
    return Scenario(scenario_id, mode, prompts, tuple(turns))


def load_scenarios(directory: str | Path) -> dict[str, Scenario]:
    scenarios = {}
    for path in sorted(Path(directory).glob("*.json")):
        scenario = load_scenario(path)
        if scenario.scenario_id in scenarios:
            raise ScenarioError(f"duplicate scenario id {scenario.scenario_id}")
        scenarios[scenario.scenario_id] = scenario
    if not scenarios:
        raise ScenarioError(f"no scenario files under {directory}")
    return scenarios


def _resolve_tool_names(messages: list[dict]) -> dict[str, str]:
    """Map tool_call_id -> tool name from the assistant messages."""
    names = {}
    for msg in messages:
        if msg.get("role") != "assistant":
            continue
        for call in msg.get("tool_calls") or []:
            names[call.get("id")] = call.get("function", {}).get("name")
    return names


def _matcher_fires(turn: ScenarioTurn, body: dict) -> bool:
    messages = body.get("messages", [])
    if turn.matcher_kind == "user_contains":
        users = [m for m in messages if m.get("role") == "user"]
        if not users:
            return False
        content = users[-1].get("content") or ""
        # match the typed prompt, not the retrieval block the pipeline appends
        content = content.split(CONTEXT_BEGIN, 1)[0]
        return turn.matcher_value in content
    names = _resolve_tool_names(messages)
    return any(
        names.get(m.get("tool_call_id")) == turn.matcher_value
        for m in messages
        if m.get("role") == "tool"
    )


def _render_response(scenario: Scenario, turn_index: int, body: dict) -> dict:
    turn = scenario.turns[turn_index]
    message: dict = {"role": "assistant", "content": turn.content or ""}
    finish = "stop"
    if turn.tool_calls is not None:
        message["content"] = None
        message["tool_calls"] = [
            {
                "id": f"call-{scenario.scenario_id}-{turn_index}-{i}",
                "type": "function",
                "function": {"name": name, "arguments": json.dumps(args)},
            }
            for i, (name, args) in enumerate(turn.tool_calls)
        ]
        finish = "tool_calls"
    return {
        "id": f"scripted-{scenario.scenario_id}-{turn_index}",
        "object": "chat.completion",
        "created": 0,
        "model": body.get("model", "scripted"),
        "choices": [{"index": 0, "message": message, "finish_reason": finish}],
        "usage": {"prompt_tokens": 0, "completion_tokens": 0, "total_tokens": 0},
        "sampling_echo": {
            "temperature": body.get("temperature"),
            "top_p": body.get("top_p"),
            "min_p": body.get("min_p"),
        },
    }


def make_scripted_app(scenarios: dict[str, Scenario]) -> FastAPI:
    app = FastAPI()
    embedder = FallbackHashEmbedder()

    def reject(body: dict, reason: str, turn_index: int | None = None) -> JSONResponse:
        return JSONResponse(
            {"error": reason, "turn_index": turn_index, "request_echo": body},
            status_code=422,
        )

    @app.post("/v1/chat/completions")
    async def chat(request: Request):
        body = await request.json()
        scenario_id = body.get("scenario")
        if scenario_id is None and len(scenarios) == 1:
            scenario_id = next(iter(scenarios))
        if scenario_id not in scenarios:
            return reject(body, f"unknown or missing scenario {scenario_id!r}")
        scenario = scenarios[scenario_id]
        turn_index = sum(
            1 for m in body.get("messages", []) if m.get("role") == "assistant"
        )
        if turn_index >= len(scenario.turns):
            return reject(body, "scenario script exhausted", turn_index)
        turn = scenario.turns[turn_index]
        if turn.tool_calls is not None and not body.get("tools"):
            return reject(body, "turn expects tool use but request carries no tools", turn_index)
        if not _matcher_fires(turn, body):
            return reject(
                body,
                f"turn matcher {turn.matcher_kind}={turn.matcher_value!r} did not fire",
                turn_index,
            )
        return JSONResponse(_render_response(scenario, turn_index, body))

    @app.post("/v1/embeddings")
    async def embeddings(request: Request):
        body = await request.json()
        inputs = body.get("input", [])
        if isinstance(inputs, str):
            inputs = [inputs]
        try:
            vectors = embedder.embed(inputs)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        return JSONResponse({
            "object": "list",
            "model": body.get("model", "fallback-hash"),
            "data": [
                {"object": "embedding", "index": i, "embedding": [float(x) for x in v]}
                for i, v in enumerate(vectors)
            ],
        })

    return app
