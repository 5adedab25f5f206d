"""JSONL event logs: dense ordering, damage handling, state replay."""

import json

import pytest

from ledgermind.parser import parse_kb
from ledgermind.store import (
    CorruptSessionLog,
    SessionStore,
    decode_value,
    new_session_id,
    replay,
)
from ledgermind.engine import UNKNOWN

KB = parse_kb("""
MODE 0-10
QUALIFIER q "Which way?" 1 "left" 2 "right"
VARIABLE v
CHOICE c "Go"
RULE IF q IS "left" AND [v] > 0 THEN c Confidence=8 ELSE c Confidence=2
""")
KBS = {"demo": KB}


def record_run(store, answers):
    """Persist a consultation the way the service layer does."""
    sid = new_session_id()
    store.append(sid, "Started", {"kb": "demo", "goals": ["c"]})
    from ledgermind.engine import start_session
    session = start_session(KB, ["c"])
    for value in answers:
        q = session.pending_question
        store.append(sid, "QuestionAsked", {"question_id": q.id, "subject": q.subject,
                                            "replayed": False})
        session.answer(q.id, value)
        wire = "UNKNOWN" if value is UNKNOWN else (
            list(value) if isinstance(value, tuple) else value)
        store.append(sid, "Answered", {"question_id": q.id, "subject": q.subject,
                                       "value": wire, "replayed": False})
    return sid, session


def test_ids_are_long_random_hex():
    ids = {new_session_id() for _ in range(50)}
    assert len(ids) == 50
    assert all(len(i) == 32 and int(i, 16) >= 0 for i in ids)


def test_append_assigns_dense_seq(tmp_path):
    store = SessionStore(tmp_path)
    sid = new_session_id()
    events = [store.append(sid, "Started", {"kb": "demo"}),
              store.append(sid, "Finished", {})]
    assert [e.seq for e in events] == [1, 2]
    read_back = store.read(sid)
    assert [(e.seq, e.kind) for e in read_back] == [(1, "Started"), (2, "Finished")]
    assert store.append(sid, "Finished", {}).seq == 3


def test_append_rejects_unknown_kind(tmp_path):
    store = SessionStore(tmp_path)
    with pytest.raises(ValueError):
        store.append(new_session_id(), "Exploded", {})


def test_missing_log_is_corrupt(tmp_path):
    store = SessionStore(tmp_path)
    with pytest.raises(CorruptSessionLog):
        store.read("doesnotexist")


def test_torn_trailing_line_is_dropped(tmp_path):
    store = SessionStore(tmp_path)
    sid = new_session_id()
    store.append(sid, "Started", {"kb": "demo"})
    store.append(sid, "Finished", {})
    path = tmp_path / f"{sid}.jsonl"
    with open(path, "a", encoding="utf-8") as handle:
        handle.write('{"seq": 3, "kind": "Answer')  # crash mid-write
    events = store.read(sid)
    assert [e.seq for e in events] == [1, 2]
    # the next append continues after the surviving prefix
    assert store.append(sid, "Finished", {}).seq == 3


def test_malformed_complete_line_is_corrupt(tmp_path):
    store = SessionStore(tmp_path)
    sid = new_session_id()
    store.append(sid, "Started", {"kb": "demo"})
    path = tmp_path / f"{sid}.jsonl"
    with open(path, "a", encoding="utf-8") as handle:
        handle.write("this is not json\n")
    with pytest.raises(CorruptSessionLog) as exc:
        store.read(sid)
    assert "line 2" in str(exc.value)


def test_non_dense_seq_is_corrupt(tmp_path):
    store = SessionStore(tmp_path)
    sid = new_session_id()
    path = tmp_path / f"{sid}.jsonl"
    lines = [json.dumps({"seq": s, "kind": "Started", "payload": {}, "ts": "t"})
             for s in (1, 3)]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorruptSessionLog) as exc:
        store.read(sid)
    assert "seq 3" in str(exc.value)


def test_quarantine_renames_and_frees_the_id(tmp_path):
    store = SessionStore(tmp_path)
    sid = new_session_id()
    store.append(sid, "Started", {"kb": "demo"})
    moved = store.quarantine(sid)
    assert moved.suffix == ".corrupt"
    assert store.session_ids() == []
    # a second quarantine target never overwrites the first
    store.append(sid, "Started", {"kb": "demo"})
    moved2 = store.quarantine(sid)
    assert moved2 != moved and moved2.exists() and moved.exists()


def test_session_ids_lists_only_jsonl(tmp_path):
    store = SessionStore(tmp_path)
    a, b = sorted((new_session_id(), new_session_id()))
    store.append(a, "Started", {})
    store.append(b, "Started", {})
    (tmp_path / "junk.txt").write_text("x")
    assert store.session_ids() == [a, b]


def test_decode_value():
    assert decode_value("UNKNOWN") is UNKNOWN
    assert decode_value(["a", "b"]) == ("a", "b")
    assert decode_value(3.5) == 3.5
    assert decode_value("plain") == "plain"


# --- replay -----------------------------------------------------------------

def test_replay_reconstructs_finished_session(tmp_path):
    store = SessionStore(tmp_path)
    sid, live = record_run(store, [("left",), 5.0])
    kb_name, rebuilt = replay(sid, store.read(sid), KBS)
    assert kb_name == "demo"
    assert rebuilt.status == "Finished"
    assert rebuilt.solutions() == live.solutions()
    assert rebuilt.facts == live.facts


def test_replay_reconstructs_mid_session(tmp_path):
    store = SessionStore(tmp_path)
    sid, live = record_run(store, [("left",)])
    _, rebuilt = replay(sid, store.read(sid), KBS)
    assert rebuilt.status == "AwaitingAnswer"
    assert rebuilt.pending_question == live.pending_question


def test_replay_handles_unknown_answers(tmp_path):
    store = SessionStore(tmp_path)
    sid, live = record_run(store, [UNKNOWN])
    _, rebuilt = replay(sid, store.read(sid), KBS)
    assert rebuilt.status == live.status == "Finished"
    assert rebuilt.solutions() == live.solutions()


def test_replay_requires_started_first():
    events = []
    with pytest.raises(CorruptSessionLog):
        replay("sid", events, KBS)


def test_replay_rejects_unknown_kb(tmp_path):
    store = SessionStore(tmp_path)
    sid = new_session_id()
    store.append(sid, "Started", {"kb": "nope", "goals": []})
    with pytest.raises(CorruptSessionLog):
        replay(sid, store.read(sid), KBS)


def test_replay_rejects_out_of_flow_answer(tmp_path):
    store = SessionStore(tmp_path)
    sid = new_session_id()
    store.append(sid, "Started", {"kb": "demo", "goals": ["c"]})
    store.append(sid, "Answered", {"question_id": 99, "value": ["left"],
                                   "replayed": False})
    with pytest.raises(CorruptSessionLog) as exc:
        replay(sid, store.read(sid), KBS)
    assert "question 99" in str(exc.value)


def test_replay_applies_revisions(tmp_path):
    store = SessionStore(tmp_path)
    sid, live = record_run(store, [("left",), 5.0])
    assert live.solutions()[0][2].value == 8.0
    store.append(sid, "Revised", {"question_id": 1, "value": ["right"]})
    _, rebuilt = replay(sid, store.read(sid), KBS)
    assert rebuilt.status == "Finished"
    # gate flipped: premise false on first condition, ELSE gives 2
    assert rebuilt.solutions()[0][2].value == 2.0
    assert len(rebuilt.history) == 1
