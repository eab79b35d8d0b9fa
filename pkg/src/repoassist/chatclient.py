"""HTTP client for OpenAI-compatible chat-completions endpoints.

Single-attempt semantics: every call produces exactly one HTTP exchange and,
when a trace store is attached, exactly one raw trace linked to the audit
event id the caller passes in. Retry policy lives in the pipeline, not here.
"""
from __future__ import annotations

import json

import requests

from .errors import ModelEndpointError
from .proxy import TraceStore


class ChatCompletionsClient:
    def __init__(self, base_url: str, timeout: float = 120.0, session=None,
                 trace_store: TraceStore | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = session or requests.Session()
        self.trace_store = trace_store

    @property
    def endpoint(self) -> str:
        return f"{self.base_url}/v1/chat/completions"

    def complete(self, request: dict, linked_event_id: int | None = None) -> dict:
        body = json.dumps(request, ensure_ascii=False).encode("utf-8")
        try:
            resp = self._session.post(
                self.endpoint,
                data=body,
                headers={"Content-Type": "application/json"},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise ModelEndpointError(f"chat endpoint unreachable: {exc}") from exc
        if self.trace_store is not None:
            self.trace_store.capture(
                "to_model", "POST", "/v1/chat/completions",
                body, resp.content, resp.status_code, linked_event_id,
            )
        if resp.status_code != 200:
            err = ModelEndpointError(
                f"chat endpoint returned {resp.status_code}: {resp.text[:500]}"
            )
            err.status_code = resp.status_code
            err.body = resp.text
            raise err
        try:
            return resp.json()
        except ValueError as exc:
            raise ModelEndpointError(f"unparseable chat response: {exc}") from exc
