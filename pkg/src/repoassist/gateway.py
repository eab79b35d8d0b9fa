"""HTTP gateway over the orchestrator: session creation, turn execution and
ordered audit event access. The chat UI, the CLI and the harness all speak to
this surface; nothing here adds state beyond what the orchestrator owns."""
from __future__ import annotations

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    InvalidSampling,
    ModelEndpointError,
    SessionNotFound,
    ToolLoopBudgetExceeded,
    TurnInFlight,
    UnknownModel,
)
from .orchestrator import ChatSession, Orchestrator, SamplingConfig


class SamplingBody(BaseModel):
    temperature: float = 1.0
    top_p: float = 1.0
    min_p: float = 0.0


class CreateSessionBody(BaseModel):
    model_id: str
    sampling: SamplingBody | None = None
    preset: str | None = None
    response_language: str | None = None
    # replay binding, forwarded to the scripted endpoint; ignored by live models
    scenario: str | None = None


class MessageBody(BaseModel):
    text: str


def _session_view(session: ChatSession) -> dict:
    return {
        "session_id": session.session_id,
        "model_id": session.model_id,
        "sampling": session.sampling.as_dict(),
        "inventory_loaded": session.inventory_loaded,
        "closed": session.closed,
        "messages": [m.to_wire() for m in session.messages],
    }


def make_gateway_app(orchestrator: Orchestrator,
                     presets: dict[str, SamplingConfig] | None = None) -> FastAPI:
    app = FastAPI(title="repoassist gateway")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    presets = presets or {}

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/presets")
    def list_presets():
        return {name: cfg.as_dict() for name, cfg in presets.items()}

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        try:
            if body.preset is not None:
                if body.preset not in presets:
                    return JSONResponse({"detail": f"unknown preset {body.preset!r}"},
                                        status_code=422)
                sampling = presets[body.preset]
            elif body.sampling is not None:
                sampling = SamplingConfig(body.sampling.temperature,
                                          body.sampling.top_p, body.sampling.min_p)
            else:
                sampling = SamplingConfig()
            extra = {"scenario": body.scenario} if body.scenario else None
            session = orchestrator.create_session(
                model_id=body.model_id,
                sampling=sampling,
                response_language=body.response_language,
                request_extra=extra,
            )
        except (UnknownModel, InvalidSampling) as exc:
            return JSONResponse({"detail": str(exc)}, status_code=422)
        return _session_view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            return _session_view(orchestrator.get_session(session_id))
        except SessionNotFound:
            return JSONResponse({"detail": "session not found"}, status_code=404)

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody):
        try:
            session = orchestrator.get_session(session_id)
            result = orchestrator.send_user_message(session, body.text)
        except SessionNotFound:
            return JSONResponse({"detail": "session not found"}, status_code=404)
        except TurnInFlight:
            return JSONResponse({"detail": "a turn is already in flight"}, status_code=409)
        except ToolLoopBudgetExceeded:
            return JSONResponse({"detail": "tool loop budget exceeded"}, status_code=500)
        except ModelEndpointError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=502)
        return {
            "text": result.text,
            "sampling_echo": result.sampling_echo,
            "tool_trace": [
                {
                    "call_id": step.call.call_id,
                    "tool_name": step.call.tool_name,
                    "arguments": step.call.arguments,
                    "result": step.result,
                    "is_error": step.is_error,
                }
                for step in result.tool_trace
            ],
            "retrieved": [
                {
                    "chunk_id": sc.chunk.chunk_id,
                    "source": sc.chunk.source,
                    "score": sc.score,
                    "text": sc.chunk.text,
                }
                for sc in result.retrieved
            ],
        }

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str):
        try:
            events = orchestrator.audit.events(session_id)
        except SessionNotFound:
            return JSONResponse({"detail": "session not found"}, status_code=404)
        return {
            "events": [
                {
                    "event_id": e.event_id,
                    "session_id": e.session_id,
                    "kind": e.kind,
                    "payload": e.payload,
                    "ts": e.ts,
                }
                for e in events
            ]
        }

    return app


def sampling_presets_from_fixture(path) -> dict[str, SamplingConfig]:
    """Preset menu: every sampling-sweep row label plus the model-sweep preset."""
    from .harness import load_sampling_rows

    _, rows = load_sampling_rows(path)
    presets = {row.label: row.config for row in rows}
    presets["model sweep"] = SamplingConfig(0.5, 0.95, 0.0)
    return presets
