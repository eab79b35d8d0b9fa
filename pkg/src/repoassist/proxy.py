"""Capturing HTTP proxy: forwards verbatim to one upstream and stores raw
request/response traces, linked to pipeline events when a link source is set.

The read-only guarantee tests point the repository client at this proxy and
assert that no request with a write verb ever crossed it.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import requests

from .errors import PortInUse

_HOP_BY_HOP = {
    "connection", "keep-alive", "proxy-authenticate", "proxy-authorization",
    "te", "trailers", "transfer-encoding", "upgrade", "host", "content-length",
}


@dataclass(frozen=True)
class HttpTrace:
    trace_id: int
    direction: str  # "to_model" | "to_provider"
    method: str
    path: str
    request_bytes: bytes
    response_bytes: bytes
    status: int
    linked_event_id: int | None


class LinkCell:
    """Mutable holder for the audit event id a forwarded request belongs to."""

    def __init__(self):
        self._lock = threading.Lock()
        self._value: int | None = None

    def set(self, event_id: int | None) -> None:
        with self._lock:
            self._value = event_id

    def get(self) -> int | None:
        with self._lock:
            return self._value


@dataclass
class TraceStore:
    """In-memory trace list, mirrored to runs/<run>/traces/ when a dir is set."""

    directory: Path | None = None
    traces: list[HttpTrace] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def capture(self, direction: str, method: str, path: str,
                request_bytes: bytes, response_bytes: bytes, status: int,
                linked_event_id: int | None = None) -> int:
        with self._lock:
            trace = HttpTrace(len(self.traces) + 1, direction, method, path,
                              request_bytes, response_bytes, status, linked_event_id)
            self.traces.append(trace)
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
            record = {
                "trace_id": trace.trace_id,
                "direction": direction,
                "method": method,
                "path": path,
                "status": status,
                "linked_event_id": linked_event_id,
                "request": request_bytes.decode("utf-8", errors="replace"),
                "response": response_bytes.decode("utf-8", errors="replace"),
            }
            out = self.directory / f"{trace.trace_id:06d}.json"
            out.write_text(json.dumps(record, indent=2, ensure_ascii=False))
        return trace.trace_id

    def by_direction(self, direction: str) -> list[HttpTrace]:
        with self._lock:
            return [t for t in self.traces if t.direction == direction]

    def observed_methods(self) -> list[tuple[str, str]]:
        with self._lock:
            return [(t.method, t.path) for t in self.traces]


class CapturingProxy:
    """Reverse proxy in front of one upstream base URL."""

    def __init__(self, upstream_base: str, store: TraceStore, direction: str,
                 host: str = "127.0.0.1", port: int = 0,
                 link_source: LinkCell | None = None):
        self.upstream_base = upstream_base.rstrip("/")
        self.store = store
        self.direction = direction
        self.link_source = link_source
        proxy = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, *args):
                pass

            def _forward(self):
                length = int(self.headers.get("Content-Length") or 0)
                body = self.rfile.read(length) if length else b""
                headers = {
                    k: v for k, v in self.headers.items()
                    if k.lower() not in _HOP_BY_HOP
                }
                url = proxy.upstream_base + self.path
                try:
                    upstream = requests.request(
                        self.command, url, headers=headers, data=body, timeout=60.0
                    )
                except requests.RequestException as exc:
                    message = json.dumps({"proxy_error": str(exc)}).encode()
                    proxy._record(self, body, message, 502)
                    self.send_response(502)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(message)))
                    self.end_headers()
                    self.wfile.write(message)
                    return
                proxy._record(self, body, upstream.content, upstream.status_code)
                self.send_response(upstream.status_code)
                for k, v in upstream.headers.items():
                    if k.lower() in _HOP_BY_HOP:
                        continue
                    self.send_header(k, v)
                self.send_header("Content-Length", str(len(upstream.content)))
                self.end_headers()
                self.wfile.write(upstream.content)

            do_GET = _forward
            do_POST = _forward
            do_PUT = _forward
            do_PATCH = _forward
            do_DELETE = _forward
            do_HEAD = _forward

        try:
            self._server = ThreadingHTTPServer((host, port), Handler)
        except OSError as exc:
            raise PortInUse(f"cannot bind {host}:{port}: {exc}") from exc
        self.host, self.port = self._server.server_address[:2]
        self.base_url = f"http://{self.host}:{self.port}"
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def _record(self, handler, body: bytes, response_bytes: bytes, status: int) -> None:
        request_bytes = (
            f"{handler.command} {handler.path} {handler.request_version}\r\n".encode()
            + str(handler.headers).encode()
            + b"\r\n"
            + body
        )
        linked = self.link_source.get() if self.link_source else None
        self.store.capture(self.direction, handler.command, handler.path,
                           request_bytes, response_bytes, status, linked)

    def start(self) -> "CapturingProxy":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=10.0)

    def __enter__(self) -> "CapturingProxy":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
