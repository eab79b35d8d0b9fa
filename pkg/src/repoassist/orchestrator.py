"""The prompt -> retrieval -> generation pipeline.

A session owns its message history, sampling configuration, tool registry and
knowledge-base handle; turns are strictly serialized per session. Tool calls
returned by the model are validated, dispatched and appended as tool results
until the model answers in text or the loop budget runs out. Every step is
written to the audit ledger before the pipeline proceeds.
"""
from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field

from .audit import AuditLog
from .chatclient import ChatCompletionsClient
from .docindex import DocIndex, ScoredChunk
from .errors import (
    InvalidSampling,
    ModelEndpointError,
    SessionNotFound,
    ToolExecutionError,
    ToolLoopBudgetExceeded,
    ToolNotFound,
    ToolValidationError,
    TurnInFlight,
    UnknownModel,
)
from .proxy import LinkCell
from .tools import REQUIRED_TOOL_NAMES, ToolCall, ToolRegistry

TOOL_LOOP_BUDGET = 8
DEFAULT_RETRIEVAL_K = 4

CONTEXT_BEGIN = "[BEGIN RETRIEVED CONTEXT]"
CONTEXT_END = "[END RETRIEVED CONTEXT]"

DEFAULT_SYSTEM_PROMPT = (
    "You are a repository-aware programming assistant for a Java game project. "
    "Ground every answer in the retrieved context passages and in repository "
    "facts obtained through the available tools; do not invent classes, methods "
    "or resources. Initialize the session once by calling load_battleship_json "
    "to load the repository's class inventory; later calls are disabled. When a "
    "prompt references code artifacts, resolve the class path with "
    "find_class_path, confirm methods with get_methods before fetching, and "
    "read files with get_content_from_file. Answer in {language}."
)


@dataclass(frozen=True)
class SamplingConfig:
    temperature: float = 1.0
    top_p: float = 1.0
    min_p: float = 0.0

    def __post_init__(self):
        if self.temperature < 0:
            raise InvalidSampling(f"temperature must be >= 0, got {self.temperature}")
        if not (0 < self.top_p <= 1):
            raise InvalidSampling(f"top_p must be in (0, 1], got {self.top_p}")
        if not (0 <= self.min_p < 1):
            raise InvalidSampling(f"min_p must be in [0, 1), got {self.min_p}")

    def as_dict(self) -> dict:
        return {"temperature": self.temperature, "top_p": self.top_p, "min_p": self.min_p}


@dataclass
class ChatMessage:
    role: str  # system | user | assistant | tool
    content: str = ""
    tool_calls: list[ToolCall] | None = None
    tool_call_id: str | None = None

    def to_wire(self) -> dict:
        msg: dict = {"role": self.role, "content": self.content}
        if self.tool_calls:
            msg["tool_calls"] = [
                {
                    "id": c.call_id,
                    "type": "function",
                    "function": {
                        "name": c.tool_name,
                        "arguments": json.dumps(c.arguments),
                    },
                }
                for c in self.tool_calls
            ]
        if self.tool_call_id is not None:
            msg["tool_call_id"] = self.tool_call_id
        return msg


@dataclass
class ToolStep:
    call: ToolCall
    result: str
    is_error: bool


@dataclass
class TurnResult:
    text: str
    tool_trace: list[ToolStep]
    retrieved: list[ScoredChunk]
    sampling_echo: dict | None


@dataclass
class ChatSession:
    session_id: str
    model_id: str
    sampling: SamplingConfig
    tools: ToolRegistry
    knowledge_base: DocIndex | None
    messages: list[ChatMessage] = field(default_factory=list)
    inventory_loaded: bool = False
    inventory: object = None
    retrieval_k: int = DEFAULT_RETRIEVAL_K
    request_extra: dict = field(default_factory=dict)
    closed: bool = False
    _turn_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class Orchestrator:
    """Creates sessions and runs their turns against one chat endpoint.

    The same dispatch path serves every model id; there is no model-specific
    tool routing anywhere in here.
    """

    def __init__(self, client: ChatCompletionsClient, audit: AuditLog,
                 registry_factory, knowledge_base: DocIndex | None = None,
                 known_models: set[str] | None = None,
                 response_language: str = "English",
                 link_cell: LinkCell | None = None):
        self.client = client
        self.audit = audit
        self.registry_factory = registry_factory
        self.knowledge_base = knowledge_base
        self.known_models = known_models
        self.response_language = response_language
        self.link_cell = link_cell
        self.sessions: dict[str, ChatSession] = {}
        self._lock = threading.Lock()

    # -- session lifecycle -----------------------------------------------

    def create_session(self, model_id: str, sampling: SamplingConfig | None = None,
                       session_id: str | None = None,
                       knowledge_base: DocIndex | None = None,
                       registry: ToolRegistry | None = None,
                       response_language: str | None = None,
                       request_extra: dict | None = None,
                       retrieval_k: int = DEFAULT_RETRIEVAL_K) -> ChatSession:
        if self.known_models is not None and model_id not in self.known_models:
            raise UnknownModel(f"unknown model id {model_id!r}")
        sampling = sampling or SamplingConfig()
        registry = registry or self.registry_factory()
        missing = set(REQUIRED_TOOL_NAMES) - set(registry.names())
        if missing:
            raise ValueError(f"session registry missing required tools: {sorted(missing)}")
        session_id = session_id or uuid.uuid4().hex
        language = response_language or self.response_language
        session = ChatSession(
            session_id=session_id,
            model_id=model_id,
            sampling=sampling,
            tools=registry,
            knowledge_base=knowledge_base if knowledge_base is not None else self.knowledge_base,
            request_extra=dict(request_extra or {}),
            retrieval_k=retrieval_k,
        )
        session.messages.append(
            ChatMessage("system", DEFAULT_SYSTEM_PROMPT.format(language=language))
        )
        with self._lock:
            if session_id in self.sessions:
                raise ValueError(f"session id {session_id!r} already exists")
            self.sessions[session_id] = session
        self.audit.open_session(session_id)
        return session

    def get_session(self, session_id: str) -> ChatSession:
        with self._lock:
            if session_id not in self.sessions:
                raise SessionNotFound(session_id)
            return self.sessions[session_id]

    def close_session(self, session_id: str) -> None:
        self.get_session(session_id).closed = True

    # -- request assembly --------------------------------------------------

    @staticmethod
    def render_context_block(retrieved: list[ScoredChunk]) -> str:
        parts = [CONTEXT_BEGIN]
        for rank, sc in enumerate(retrieved, start=1):
            parts.append(f"[{rank}] source={sc.chunk.source} score={sc.score:.4f}")
            parts.append(sc.chunk.text)
        parts.append(CONTEXT_END)
        return "\n".join(parts)

    def assemble_request(self, session: ChatSession,
                         retrieved: list[ScoredChunk]) -> dict:
        """Deterministic request serialization: system prompt first, history in
        order, retrieved passages appended to the latest user message, sampling
        copied verbatim, tools in registry order."""
        wire_messages = []
        last_user_index = max(
            (i for i, m in enumerate(session.messages) if m.role == "user"),
            default=None,
        )
        for i, message in enumerate(session.messages):
            wire = message.to_wire()
            if i == last_user_index and retrieved:
                wire["content"] = (
                    f"{message.content}\n\n{self.render_context_block(retrieved)}"
                )
            wire_messages.append(wire)
        request = {
            "model": session.model_id,
            "messages": wire_messages,
            "tools": session.tools.to_wire(),
            "tool_choice": "auto",
            **session.sampling.as_dict(),
        }
        request.update(session.request_extra)
        return request

    # -- tool dispatch ------------------------------------------------------

    def execute_tool_call(self, session: ChatSession, call: ToolCall) -> str:
        """Validate and dispatch one call; raises the structured tool errors."""
        spec = session.tools.get(call.tool_name)  # ToolNotFound
        session.tools.validate_arguments(call)  # ToolValidationError
        try:
            return spec.handler(session, call.arguments)
        except ToolExecutionError:
            raise
        except Exception as exc:  # backend failures become model-readable
            raise ToolExecutionError(f"{call.tool_name} failed: {exc}") from exc

    # -- the turn loop --------------------------------------------------

    def send_user_message(self, session: ChatSession, text: str) -> TurnResult:
        if session.closed:
            raise SessionNotFound(f"session {session.session_id} is closed")
        if not session._turn_lock.acquire(blocking=False):
            raise TurnInFlight(session.session_id)
        try:
            return self._run_turn(session, text)
        finally:
            session._turn_lock.release()

    def _run_turn(self, session: ChatSession, text: str) -> TurnResult:
        sid = session.session_id
        self.audit.record(sid, "user_prompt", {"text": text})

        retrieved: list[ScoredChunk] = []
        kb = session.knowledge_base
        if kb is not None and len(kb) > 0:
            retrieved = kb.query(text, k=session.retrieval_k)
        self.audit.record(sid, "retrieval", {
            "query": text,
            "chunks": [
                {
                    "chunk_id": sc.chunk.chunk_id,
                    "source": sc.chunk.source,
                    "score": sc.score,
                    "text": sc.chunk.text,
                }
                for sc in retrieved
            ],
        })

        session.messages.append(ChatMessage("user", text))
        trace: list[ToolStep] = []
        iterations = 0

        while True:
            request = self.assemble_request(session, retrieved)
            response = self._submit(sid, request)
            message, finish = self._parse_choice(sid, response)

            if message.tool_calls:
                if iterations >= TOOL_LOOP_BUDGET:
                    self.audit.record(sid, "error", {
                        "message": f"tool loop budget of {TOOL_LOOP_BUDGET} exceeded",
                    })
                    raise ToolLoopBudgetExceeded(sid)
                iterations += 1
                session.messages.append(message)
                for call in message.tool_calls:
                    step = self._dispatch(session, call)
                    trace.append(step)
                    session.messages.append(
                        ChatMessage("tool", step.result, tool_call_id=call.call_id)
                    )
                continue

            session.messages.append(message)
            echo = response.get("sampling_echo")
            self.audit.record(sid, "model_response", {
                "content": message.content,
                "finish_reason": finish,
                "sampling_echo": echo,
            })
            return TurnResult(message.content, trace, retrieved, echo)

    def _submit(self, sid: str, request: dict) -> dict:
        event_id = self.audit.record(sid, "model_request", {"request": request})
        try:
            return self.client.complete(request, linked_event_id=event_id)
        except ModelEndpointError as exc:
            status = getattr(exc, "status_code", None)
            body = getattr(exc, "body", "") or ""
            if status in (400, 422) and "min_p" in body and "min_p" in request:
                # endpoint rejects the field: strip it, log, resubmit once
                self.audit.record(sid, "error", {
                    "message": "endpoint rejected min_p; field stripped and request resubmitted",
                    "status": status,
                })
                stripped = {k: v for k, v in request.items() if k != "min_p"}
                retry_event = self.audit.record(sid, "model_request", {"request": stripped})
                try:
                    return self.client.complete(stripped, linked_event_id=retry_event)
                except ModelEndpointError as retry_exc:
                    self.audit.record(sid, "error", {"message": str(retry_exc)})
                    raise
            self.audit.record(sid, "error", {"message": str(exc)})
            raise

    def _parse_choice(self, sid: str, response: dict) -> tuple[ChatMessage, str | None]:
        try:
            choice = response["choices"][0]
            raw = choice["message"]
        except (KeyError, IndexError, TypeError) as exc:
            self.audit.record(sid, "error", {"message": f"malformed chat response: {exc}"})
            raise ModelEndpointError(f"malformed chat response: {exc}") from exc
        calls = []
        for item in raw.get("tool_calls") or []:
            fn = item.get("function", {})
            raw_args = fn.get("arguments", "{}")
            try:
                arguments = json.loads(raw_args) if isinstance(raw_args, str) else dict(raw_args)
            except (ValueError, TypeError):
                arguments = {"__unparseable__": raw_args}
            calls.append(ToolCall(
                call_id=item.get("id") or f"call-{uuid.uuid4().hex[:8]}",
                tool_name=fn.get("name", ""),
                arguments=arguments,
            ))
        message = ChatMessage(
            role="assistant",
            content=raw.get("content") or "",
            tool_calls=calls or None,
        )
        return message, choice.get("finish_reason")

    def _dispatch(self, session: ChatSession, call: ToolCall) -> ToolStep:
        sid = session.session_id
        call_event = self.audit.record(sid, "tool_call", {
            "call_id": call.call_id,
            "tool_name": call.tool_name,
            "arguments": call.arguments,
        })
        if self.link_cell is not None:
            self.link_cell.set(call_event)
        try:
            if "__unparseable__" in call.arguments:
                raise ToolValidationError(
                    f"arguments for {call.tool_name} are not valid JSON"
                )
            result = self.execute_tool_call(session, call)
            is_error = False
        except (ToolNotFound, ToolValidationError, ToolExecutionError) as exc:
            result = json.dumps({"error": str(exc)})
            is_error = True
        finally:
            if self.link_cell is not None:
                self.link_cell.set(None)
        self.audit.record(sid, "tool_result", {
            "call_id": call.call_id,
            "tool_name": call.tool_name,
            "result": result,
            "is_error": is_error,
        })
        if is_error:
            self.audit.record(sid, "error", {
                "message": f"tool {call.tool_name} returned an error result",
                "call_id": call.call_id,
                "linked_event_id": call_event,
            })
        return ToolStep(call, result, is_error)
