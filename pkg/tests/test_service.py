"""Session service and wire API: endpoints, error codes, crash recovery."""

import pytest
from fastapi.testclient import TestClient

from ledgermind.parser import parse_kb, serialize_kb
from ledgermind.service import (
    SessionService,
    UnknownKb,
    UnknownSession,
    create_app,
    load_kb_dir,
    shipped_kb_dir,
)
from ledgermind.store import SessionStore

GATE_KB = parse_kb("""
MODE 0-10
QUALIFIER gate "Which way?" 1 "left" 2 "right"
VARIABLE depth "How deep?"
CHOICE go "Proceed"
CHOICE stop "Hold"
RULE IF gate IS "left" AND [depth] > 3 THEN go Confidence=8 ELSE stop Confidence=6
""")


@pytest.fixture()
def service(tmp_path):
    return SessionService({"gate": GATE_KB}, SessionStore(tmp_path / "sessions"))


@pytest.fixture()
def client(service):
    return TestClient(create_app(service))


def finish_left(client):
    sid = client.post("/kbs/gate/sessions", json={}).json()["session_id"]
    next_q = client.get(f"/sessions/{sid}/next").json()
    client.post(f"/sessions/{sid}/answers",
                json={"question_id": next_q["question"]["id"], "value": "left"})
    next_q = client.get(f"/sessions/{sid}/next").json()
    client.post(f"/sessions/{sid}/answers",
                json={"question_id": next_q["question"]["id"], "value": 5})
    return sid


def test_create_session_and_first_question(client):
    response = client.post("/kbs/gate/sessions", json={})
    assert response.status_code == 201
    sid = response.json()["session_id"]
    payload = client.get(f"/sessions/{sid}/next").json()
    assert payload["status"] == "AwaitingAnswer"
    q = payload["question"]
    assert q["subject"] == "gate"
    assert q["options"] == ["left", "right"]
    assert q["multi"] is False


def test_create_with_goals_restricts(client):
    sid = client.post("/kbs/gate/sessions",
                      json={"goals": ["stop"]}).json()["session_id"]
    q = client.get(f"/sessions/{sid}/next").json()["question"]
    assert q["subject"] == "gate"


def test_unknown_kb_404(client):
    assert client.post("/kbs/nope/sessions", json={}).status_code == 404


def test_unknown_session_404(client):
    assert client.get("/sessions/feedbeef/next").status_code == 404


def test_unknown_goal_409(client):
    response = client.post("/kbs/gate/sessions", json={"goals": ["nope"]})
    assert response.status_code == 409
    assert "error" in response.json()


def test_full_consultation_and_solutions(client):
    sid = finish_left(client)
    payload = client.get(f"/sessions/{sid}/next").json()
    assert payload == {"status": "Finished", "question": None}
    solutions = client.get(f"/sessions/{sid}/solutions").json()
    assert solutions == [{"choice": "go", "statement": "Proceed",
                          "confidence": 8.0, "mode": "0-10"}]


def test_numeric_question_payload(client):
    sid = client.post("/kbs/gate/sessions", json={}).json()["session_id"]
    q = client.get(f"/sessions/{sid}/next").json()["question"]
    client.post(f"/sessions/{sid}/answers",
                json={"question_id": q["id"], "value": "left"})
    q2 = client.get(f"/sessions/{sid}/next").json()["question"]
    assert q2["options"] is None
    assert q2["value_kind"] == "NUMERIC"
    assert q2["prompt"] == "Please input a value for the variable [depth] (How deep?)"


def test_stale_question_id_409_and_unchanged(client):
    sid = client.post("/kbs/gate/sessions", json={}).json()["session_id"]
    before = client.get(f"/sessions/{sid}/next").json()
    response = client.post(f"/sessions/{sid}/answers",
                           json={"question_id": 999, "value": "left"})
    assert response.status_code == 409
    assert client.get(f"/sessions/{sid}/next").json() == before


def test_illegal_value_409(client):
    sid = client.post("/kbs/gate/sessions", json={}).json()["session_id"]
    q = client.get(f"/sessions/{sid}/next").json()["question"]
    response = client.post(f"/sessions/{sid}/answers",
                           json={"question_id": q["id"], "value": "sideways"})
    assert response.status_code == 409


def test_solutions_before_finish_409(client):
    sid = client.post("/kbs/gate/sessions", json={}).json()["session_id"]
    assert client.get(f"/sessions/{sid}/solutions").status_code == 409


def test_why_payload(client):
    sid = client.post("/kbs/gate/sessions", json={}).json()["session_id"]
    chain = client.get(f"/sessions/{sid}/why").json()
    assert [node["rule"] for node in chain] == ["R1"]
    assert chain[0]["outcome"] == "Pending"
    conditions = chain[0]["conditions"]
    assert conditions[0]["text"] == 'gate IS "left"'
    assert conditions[0]["status"] == "Unknown"
    assert conditions[0]["origin"] == {"kind": "Unresolved"}


def test_why_after_finish_409(client):
    sid = finish_left(client)
    assert client.get(f"/sessions/{sid}/why").status_code == 409


def test_rule_explanation_payload(client):
    sid = finish_left(client)
    node = client.get(f"/sessions/{sid}/rules/R1").json()
    assert node["outcome"] == "THEN"
    assert node["conditions"][0]["origin"] == {"kind": "UserAnswer", "question_id": 1}
    assert node["conditions"][1]["origin"] == {"kind": "UserAnswer", "question_id": 2}


def test_rule_not_in_trace_404(client):
    sid = finish_left(client)
    assert client.get(f"/sessions/{sid}/rules/R9").status_code == 404


def test_unknown_answer_value_over_wire(client):
    sid = client.post("/kbs/gate/sessions", json={}).json()["session_id"]
    q = client.get(f"/sessions/{sid}/next").json()["question"]
    client.post(f"/sessions/{sid}/answers",
                json={"question_id": q["id"], "value": "UNKNOWN"})
    payload = client.get(f"/sessions/{sid}/next").json()
    assert payload["status"] == "Finished"
    solutions = client.get(f"/sessions/{sid}/solutions").json()
    assert solutions[0]["choice"] == "stop"


def test_revision_flow(client):
    sid = finish_left(client)
    response = client.post(f"/sessions/{sid}/revisions",
                           json={"question_id": 1, "value": "right"})
    assert response.status_code == 200
    assert response.json()["status"] == "Finished"
    solutions = client.get(f"/sessions/{sid}/solutions").json()
    assert solutions == [{"choice": "stop", "statement": "Hold",
                          "confidence": 6.0, "mode": "0-10"}]


def test_revision_unanswered_question_409(client):
    sid = finish_left(client)
    response = client.post(f"/sessions/{sid}/revisions",
                           json={"question_id": 77, "value": "right"})
    assert response.status_code == 409


def test_trace_lists_consultation_events(client):
    sid = finish_left(client)
    trace = client.get(f"/sessions/{sid}/trace").json()
    kinds = [event["kind"] for event in trace]
    assert kinds[0] == "Started"
    assert kinds[-1] == "Finished"
    assert "RuleFired" in kinds and "ScoreUpdated" in kinds


def test_cors_open(client):
    response = client.get("/sessions/x/next",
                          headers={"Origin": "http://localhost:5173"})
    assert response.headers.get("access-control-allow-origin") == "*"


# --- persistence & recovery -------------------------------------------------

def test_restart_resumes_mid_session(service, client, tmp_path):
    sid = client.post("/kbs/gate/sessions", json={}).json()["session_id"]
    q = client.get(f"/sessions/{sid}/next").json()["question"]
    client.post(f"/sessions/{sid}/answers",
                json={"question_id": q["id"], "value": "left"})
    before = client.get(f"/sessions/{sid}/next").json()

    reborn = SessionService({"gate": GATE_KB}, SessionStore(tmp_path / "sessions"))
    assert reborn.startup_reports == []
    client2 = TestClient(create_app(reborn))
    assert client2.get(f"/sessions/{sid}/next").json() == before
    # and the consultation continues normally
    client2.post(f"/sessions/{sid}/answers",
                 json={"question_id": before["question"]["id"], "value": 9})
    solutions = client2.get(f"/sessions/{sid}/solutions").json()
    assert solutions[0]["choice"] == "go"


def test_restart_preserves_post_revision_state(service, client, tmp_path):
    sid = finish_left(client)
    client.post(f"/sessions/{sid}/revisions",
                json={"question_id": 1, "value": "right"})
    expected = client.get(f"/sessions/{sid}/solutions").json()

    reborn = SessionService({"gate": GATE_KB}, SessionStore(tmp_path / "sessions"))
    client2 = TestClient(create_app(reborn))
    assert client2.get(f"/sessions/{sid}/solutions").json() == expected


def test_corrupt_log_quarantined_at_startup(service, client, tmp_path):
    sid = finish_left(client)
    log = tmp_path / "sessions" / f"{sid}.jsonl"
    text = log.read_text()
    log.write_text("garbage\n" + text)

    reborn = SessionService({"gate": GATE_KB}, SessionStore(tmp_path / "sessions"))
    assert any(sid in report for report in reborn.startup_reports)
    assert not log.exists()
    assert log.with_suffix(".corrupt").exists()
    client2 = TestClient(create_app(reborn))
    assert client2.get(f"/sessions/{sid}/next").status_code == 404


def test_service_without_store_is_memory_only(tmp_path):
    service = SessionService({"gate": GATE_KB}, store=None)
    client = TestClient(create_app(service))
    sid = client.post("/kbs/gate/sessions", json={}).json()["session_id"]
    assert client.get(f"/sessions/{sid}/next").json()["status"] == "AwaitingAnswer"
    assert list(tmp_path.iterdir()) == []


def test_service_requires_at_least_one_kb():
    with pytest.raises(ValueError):
        SessionService({}, None)


def test_load_kb_dir_skips_broken_files(tmp_path):
    (tmp_path / "good.kb").write_text(serialize_kb(GATE_KB))
    (tmp_path / "broken.kb").write_text("MODE NOPE\n")
    (tmp_path / "invalid.kb").write_text(
        'MODE 0-10\nCHOICE c "x"\nRULE IF missing IS "a" THEN c Confidence=5\n')
    kbs, reports = load_kb_dir(tmp_path)
    assert list(kbs) == ["good"]
    assert len(reports) == 2
    assert any("broken.kb" in r and "parse" in r for r in reports)
    assert any("invalid.kb" in r and "validation" in r for r in reports)


def test_shipped_corpus_loads_clean():
    kbs, reports = load_kb_dir(shipped_kb_dir())
    assert reports == []
    assert set(kbs) == {"credit_risk", "valuation_advisor"}


def test_direct_service_errors():
    service = SessionService({"gate": GATE_KB})
    with pytest.raises(UnknownKb):
        service.create("nope")
    with pytest.raises(UnknownSession):
        service.get("nope")
    with pytest.raises(UnknownSession):
        service.answer("nope", 1, "left")
