"""Ledger semantics: write-ahead appends, id monotonicity, export round-trip."""

import json

import pytest

from repoassist.audit import AuditLog, import_run, replay_clock
from repoassist.errors import SessionNotFound


def test_first_event_id_is_one(tmp_path):
    log = AuditLog(tmp_path)
    assert log.record("s1", "user_prompt", {"text": "hi"}) == 1


def test_ids_are_consecutive_per_session(tmp_path):
    log = AuditLog(tmp_path)
    a = log.record("s1", "tool_call", {"call_id": "c1", "tool_name": "t", "arguments": {}})
    b = log.record("s1", "tool_result",
                   {"call_id": "c1", "tool_name": "t", "result": "ok", "is_error": False})
    other = log.record("s2", "user_prompt", {"text": "x"})
    assert (a, b) == (1, 2)
    assert other == 1
    events = log.events("s1")
    assert events[1].payload["call_id"] == events[0].payload["call_id"]


def test_write_ahead_line_is_on_disk_immediately(tmp_path):
    log = AuditLog(tmp_path)
    log.record("s1", "user_prompt", {"text": "hello"})
    raw = (tmp_path / "s1.jsonl").read_text().splitlines()
    assert len(raw) == 1
    record = json.loads(raw[0])
    assert list(record) == ["event_id", "session_id", "kind", "payload", "ts"]
    assert record["payload"] == {"text": "hello"}


def test_payload_schema_enforced(tmp_path):
    log = AuditLog(tmp_path)
    with pytest.raises(ValueError):
        log.record("s1", "user_prompt", {})
    with pytest.raises(ValueError):
        log.record("s1", "no_such_kind", {"text": "x"})


def test_unknown_session_raises(tmp_path):
    log = AuditLog(tmp_path)
    with pytest.raises(SessionNotFound):
        log.events("ghost")
    with pytest.raises(SessionNotFound):
        log.export_run("ghost")


def test_export_import_round_trip(tmp_path):
    log = AuditLog(tmp_path, clock=replay_clock)
    log.record("run1", "user_prompt", {"text": "q"})
    log.record("run1", "model_request", {"request": {"model": "m"}})
    log.record("run1", "model_response", {"content": "a"})
    exported = log.export_run("run1", tmp_path / "out" / "run1.jsonl")
    events = import_run(exported)
    assert [(e.event_id, e.kind) for e in events] == [
        (1, "user_prompt"), (2, "model_request"), (3, "model_response"),
    ]
    assert events == log.events("run1")


def test_replay_clock_makes_hashes_stable(tmp_path):
    hashes = []
    for attempt in ("a", "b"):
        log = AuditLog(tmp_path / attempt, clock=replay_clock)
        log.record("run1", "user_prompt", {"text": "same"})
        log.record("run1", "model_response", {"content": "same answer"})
        hashes.append(log.content_hash("run1"))
    assert hashes[0] == hashes[1]


def test_import_rejects_gapped_ids(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(
        '{"event_id":1,"session_id":"s","kind":"user_prompt","payload":{"text":"a"},"ts":0.0}\n'
        '{"event_id":3,"session_id":"s","kind":"model_response","payload":{"content":"b"},"ts":0.0}\n'
    )
    with pytest.raises(ValueError):
        import_run(path)
