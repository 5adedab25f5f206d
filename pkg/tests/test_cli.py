"""Command-line behavior: exit codes, console output, report files."""

import csv

import pytest
from click.testing import CliRunner

from ledgermind.cli import main, resolve_kb_path
from ledgermind.kbs import demo_script_path

CHAIN_KB = """
MODE 0-10
QUALIFIER q "Is the supplier reliable?" 1 "yes" 2 "no"
VARIABLE x
CHOICE c "Advise the purchase"
RULE IF [x] > 10 THEN c Confidence=8 ELSE c Confidence=2 NAME R1
RULE IF q IS "yes" THEN [x] = 20 NAME R2
"""


@pytest.fixture()
def runner():
    return CliRunner()


def test_resolve_kb_path_prefers_disk(tmp_path):
    own = tmp_path / "credit_risk.kb"
    own.write_text('MODE 0-10\nCHOICE c "x"\n')
    assert resolve_kb_path(str(own)) == own
    shipped = resolve_kb_path("credit_risk")
    assert shipped is not None and shipped.name == "credit_risk.kb"
    assert resolve_kb_path("no_such_kb_anywhere") is None


def test_check_shipped_corpus_ok(runner):
    for name, rules in (("credit_risk", 6), ("valuation_advisor", 12)):
        result = runner.invoke(main, ["check", name])
        assert result.exit_code == 0, result.output
        assert f"OK ({rules} rules" in result.output


def test_check_parse_error_exit_1(runner, tmp_path):
    bad = tmp_path / "bad.kb"
    bad.write_text('MODE 0-10\nCHOICE c "x"\nRULE IF [a] + THEN c Confidence=1\n')
    result = runner.invoke(main, ["check", str(bad)])
    assert result.exit_code == 1
    assert "operand" in result.output


def test_check_semantic_error_exit_2(runner, tmp_path):
    bad = tmp_path / "dangling.kb"
    bad.write_text('MODE 0-10\nCHOICE c "x"\n'
                   'RULE IF solvency IS "good" THEN c Confidence=5\n')
    result = runner.invoke(main, ["check", str(bad)])
    assert result.exit_code == 2
    assert "DanglingRef" in result.output


def test_check_missing_file_exit_3(runner):
    result = runner.invoke(main, ["check", "/nonexistent/thing.kb"])
    assert result.exit_code == 3


def test_run_credit_demo_script_deterministic(runner):
    script = str(demo_script_path("credit_risk"))
    outputs = set()
    for _ in range(3):
        result = runner.invoke(main, ["run", "credit_risk", "--script", script])
        assert result.exit_code == 0, result.output
        outputs.add(result.output)
    assert len(outputs) == 1
    output = outputs.pop()
    assert "1. Grant the credit  [grant: 9/10]" in output
    assert "2. Decline the credit application  [decline: 1/10]" in output


def test_run_valuation_demo_script(runner):
    script = str(demo_script_path("valuation_advisor"))
    result = runner.invoke(main, ["run", "valuation_advisor", "--script", script])
    assert result.exit_code == 0, result.output
    lines = [l for l in result.output.splitlines() if l.strip().startswith(tuple("1234"))]
    assert [l.split("[")[1].split(":")[0] for l in lines] == \
        ["use_acquisition_cost", "issue_lifo", "issue_wac", "issue_fifo"]


def test_run_unknown_goal_exit_2(runner):
    script = str(demo_script_path("credit_risk"))
    result = runner.invoke(main, ["run", "credit_risk", "--script", script,
                                  "--goal", "unknown_choice"])
    assert result.exit_code == 2
    assert "unknown_choice" in result.output


def test_run_script_exhausted_exit_4(runner, tmp_path):
    script = tmp_path / "short.answers"
    script.write_text("excellent\n")
    result = runner.invoke(main, ["run", "credit_risk", "--script", str(script)])
    assert result.exit_code == 4
    assert "script exhausted" in result.output
    # the pending question is shown so the script can be extended
    assert "monthly_income" in result.output


def test_run_missing_script_exit_3(runner):
    result = runner.invoke(main, ["run", "credit_risk", "--script", "/nope.answers"])
    assert result.exit_code == 3


def test_run_illegal_script_answer_exit_2(runner, tmp_path):
    script = tmp_path / "bad.answers"
    script.write_text("not_a_label\n5000\n1200\n")
    result = runner.invoke(main, ["run", "credit_risk", "--script", str(script)])
    assert result.exit_code == 2


def test_run_script_with_comments_and_numeric_choice(runner, tmp_path):
    # option picked by its 1-based number instead of its label
    script = tmp_path / "numbered.answers"
    script.write_text("# choose 'excellent' by number\n1\n5000\n1200\n")
    result = runner.invoke(main, ["run", "credit_risk", "--script", str(script)])
    assert result.exit_code == 0
    assert "[grant: 9/10]" in result.output


def test_run_trace_flag(runner):
    script = str(demo_script_path("credit_risk"))
    result = runner.invoke(main, ["run", "credit_risk", "--script", script,
                                  "--trace"])
    assert result.exit_code == 0
    assert "Trace:" in result.output
    assert "RuleFired" in result.output


def test_interactive_why_prints_rule_chain(runner, tmp_path):
    kb = tmp_path / "chain.kb"
    kb.write_text(CHAIN_KB)
    result = runner.invoke(main, ["run", str(kb)], input="why\nyes\n")
    assert result.exit_code == 0, result.output
    assert "rule R1 [Pending]" in result.output
    assert "rule R2 [Pending]" in result.output
    assert "[x] > 10" in result.output
    assert "Advise the purchase  [c: 8/10]" in result.output


def test_interactive_rule_query_and_retry(runner, tmp_path):
    kb = tmp_path / "chain.kb"
    kb.write_text(CHAIN_KB)
    result = runner.invoke(main, ["run", str(kb)],
                           input="? R9\nbogus\nUNKNOWN\nUNKNOWN\n")
    assert result.exit_code == 0, result.output
    assert "has not been evaluated" in result.output
    assert "try again" in result.output
    # q UNKNOWN -> R2 cannot conclude -> [x] asked next; UNKNOWN finishes
    assert "[x]" in result.output


def test_interactive_unknown_finishes_with_else(runner, tmp_path):
    kb = tmp_path / "chain.kb"
    kb.write_text(CHAIN_KB)
    result = runner.invoke(main, ["run", str(kb)], input="UNKNOWN\nUNKNOWN\n")
    assert result.exit_code == 0
    assert "[c: 2/10]" in result.output


def test_report_writes_csv_and_figure(runner, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(main, [
        "report", "credit_risk",
        "--script", str(demo_script_path("credit_risk")), "--out", str(out)])
    assert result.exit_code == 0, result.output
    csv_path = out / "solutions.csv"
    png_path = out / "solutions.png"
    assert f"wrote {csv_path}" in result.output
    assert f"wrote {png_path}" in result.output
    with open(csv_path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["choice", "statement", "confidence", "mode"]
    assert rows[1] == ["grant", "Grant the credit", "9.0", "0-10"]
    assert rows[2][0] == "decline"
    assert png_path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_report_empty_solutions_still_produces_files(runner, tmp_path):
    kb = tmp_path / "silent.kb"
    kb.write_text('MODE 0-10\nVARIABLE v\nCHOICE c "x"\n'
                  'RULE IF [v] > 10 THEN c Confidence=9\n')
    script = tmp_path / "s.answers"
    script.write_text("1\n")
    out = tmp_path / "out"
    result = runner.invoke(main, ["report", str(kb), "--script", str(script),
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "No recommendation reached." in result.output
    with open(out / "solutions.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows == [["choice", "statement", "confidence", "mode"]]
    assert (out / "solutions.png").exists()


def test_costing_report(runner, tmp_path):
    lots = tmp_path / "lots.csv"
    lots.write_text("seq,quantity,unit_cost\n1,10,5\n2,10,7\n")
    out = tmp_path / "out"
    result = runner.invoke(main, ["costing", str(lots), "--quantity", "15",
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    with open(out / "costs.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["method", "issue_cost", "remaining_value", "remaining_lots"]
    by_method = {row[0]: row[1] for row in rows[1:]}
    assert by_method == {"WAC": "90.00", "FIFO": "85.00", "LIFO": "95.00"}
    assert (out / "costs.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_costing_insufficient_quantity_exit_2(runner, tmp_path):
    lots = tmp_path / "lots.csv"
    lots.write_text("seq,quantity,unit_cost\n1,10,5\n")
    result = runner.invoke(main, ["costing", str(lots), "--quantity", "11"])
    assert result.exit_code == 2


def test_costing_missing_file_exit_3(runner):
    result = runner.invoke(main, ["costing", "/nope/lots.csv", "--quantity", "1"])
    assert result.exit_code == 3


def test_costing_bad_header_exit_2(runner, tmp_path):
    lots = tmp_path / "lots.csv"
    lots.write_text("a,b,c\n1,10,5\n")
    result = runner.invoke(main, ["costing", str(lots), "--quantity", "1"])
    assert result.exit_code == 2


def test_serve_with_empty_kb_dir_exit_2(runner, tmp_path):
    result = runner.invoke(main, ["serve", "--kb-dir", str(tmp_path),
                                  "--store-dir", str(tmp_path / "s")])
    assert result.exit_code == 2
    assert "no valid knowledge bases" in result.output


def test_serve_env_var_overrides_store_dir(runner, tmp_path, monkeypatch):
    calls = {}

    import uvicorn

    def fake_run(app, **kwargs):
        calls["kwargs"] = kwargs

    monkeypatch.setattr(uvicorn, "run", fake_run)
    env_store = tmp_path / "env_store"
    monkeypatch.setenv("LEDGERMIND_STORE", str(env_store))
    result = runner.invoke(main, ["serve", "--store-dir", str(tmp_path / "flag")])
    assert result.exit_code == 0, result.output
    assert env_store.is_dir()
    assert not (tmp_path / "flag").exists()
    assert calls["kwargs"]["port"] == 8000
