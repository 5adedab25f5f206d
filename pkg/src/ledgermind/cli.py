"""Command-line entry points.

Exit codes follow one scheme everywhere: 0 success, 1 parse errors,
2 semantic problems (validation diagnostics, unknown goals, illegal
answers), 3 I/O failures, 4 script exhausted before the consultation
finished.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from .engine import (
    AWAITING,
    IllegalValue,
    Question,
    Session,
    UnknownGoal,
    start_session,
)
from .explain import (
    ExplanationNode,
    NoPendingQuestion,
    RuleNotInTrace,
    explain_rule,
    why,
)
from .model import KnowledgeBase, Severity, validate
from .parser import ParseError, parse_kb
from .report import (
    ScriptExhausted,
    format_confidence,
    load_script,
    parse_answer_text,
    run_scripted,
    write_costing_report,
    write_solutions_report,
)
from .service import SessionService, create_app, shipped_kb_dir
from .valuation import ValuationError, read_lot_ledger


def resolve_kb_path(name: str) -> Path | None:
    """A filesystem path, or a shipped corpus name like ``credit_risk``."""
    path = Path(name)
    if path.exists():
        return path
    shipped = shipped_kb_dir() / f"{Path(name).stem}.kb"
    if shipped.exists():
        return shipped
    return None


def _read_kb_text(name: str) -> tuple[str, Path] | int:
    path = resolve_kb_path(name)
    if path is None:
        click.echo(f"error: no such knowledge base: {name}", err=True)
        return 3
    try:
        return path.read_text(encoding="utf-8"), path
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3


def _load_valid_kb(name: str) -> KnowledgeBase | int:
    """Parse and validate, printing problems; returns an exit code on failure."""
    loaded = _read_kb_text(name)
    if isinstance(loaded, int):
        return loaded
    text, path = loaded
    parsed = parse_kb(text)
    if isinstance(parsed, list):
        for error in parsed:
            click.echo(f"{path}:{error}", err=True)
        return 1
    diagnostics = validate(parsed)
    errors = [d for d in diagnostics if d.severity is Severity.ERROR]
    for diag in diagnostics:
        click.echo(f"{path}: {diag}", err=True)
    if errors:
        return 2
    return parsed


@click.group()
def main() -> None:
    """Rule-based consultation shell with asset-valuation calculators."""


@main.command()
@click.argument("kb")
def check(kb: str) -> None:
    """Parse and statically validate a knowledge base."""
    loaded = _read_kb_text(kb)
    if isinstance(loaded, int):
        sys.exit(loaded)
    text, path = loaded
    parsed = parse_kb(text)
    if isinstance(parsed, list):
        for error in parsed:
            click.echo(f"{path}:{error}", err=True)
        sys.exit(1)
    diagnostics = validate(parsed)
    if diagnostics:
        for diag in diagnostics:
            click.echo(f"{path}: {diag}", err=True)
        sys.exit(2)
    click.echo(f"{path}: OK ({len(parsed.rules)} rules, "
               f"{len(parsed.choices)} choices)")


def _print_question(question: Question) -> None:
    click.echo(f"\n[{question.id}] {question.prompt}")
    if question.options is not None:
        for index, label in enumerate(question.options, 1):
            click.echo(f"  {index}. {label}")
        picker = "one or more, comma-separated" if question.multi else "one"
        click.echo(f"(choose {picker}; or UNKNOWN)")


def _origin_text(origin) -> str:
    from .engine import RuleConclusion, UserAnswer

    if isinstance(origin, UserAnswer):
        return f"your answer #{origin.question_id}"
    if isinstance(origin, RuleConclusion):
        return f"concluded by rule {origin.rule}"
    return "unresolved"


def _print_node(node: ExplanationNode) -> None:
    from .parser import condition_to_text

    click.echo(f"rule {node.rule} [{node.outcome}]")
    for report in node.condition_reports:
        status = {True: "True", False: "False"}.get(report.status, "Unknown")
        click.echo(f"  {condition_to_text(report.condition)}"
                   f"  -> {status} ({_origin_text(report.origin)})")


def _print_solutions(session: Session) -> None:
    ranked = session.solutions()
    if not ranked:
        click.echo("\nNo recommendation reached.")
        return
    click.echo("\nSolutions (most certain first):")
    for position, (choice, statement, combined) in enumerate(ranked, 1):
        confidence = format_confidence(session.kb, combined.value)
        click.echo(f"  {position}. {statement}  [{choice}: {confidence}]")


def _print_trace(session: Session) -> None:
    click.echo("\nTrace:")
    for event in session.trace:
        details = " ".join(f"{k}={v}" for k, v in event.data.items())
        click.echo(f"  {event.kind} {details}".rstrip())


@main.command()
@click.argument("kb")
@click.option("--goal", "goals", multiple=True, help="Restrict to these choices.")
@click.option("--script", "script_path", type=click.Path(), default=None,
              help="Answers file, one per line; UNKNOWN allowed.")
@click.option("--trace", "show_trace", is_flag=True, help="Print the event trace.")
def run(kb: str, goals: tuple[str, ...], script_path: str | None,
        show_trace: bool) -> None:
    """Run a consultation, interactively or from a script."""
    parsed = _load_valid_kb(kb)
    if isinstance(parsed, int):
        sys.exit(parsed)

    if script_path is not None:
        try:
            answers = load_script(script_path)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        try:
            session = run_scripted(parsed, answers, list(goals) or None)
        except UnknownGoal as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except IllegalValue as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except ScriptExhausted as exc:
            _print_question(exc.question)
            click.echo("error: script exhausted before the consultation finished",
                       err=True)
            sys.exit(4)
    else:
        try:
            session = start_session(parsed, list(goals) or None)
        except UnknownGoal as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        session = _interactive_loop(session)

    _print_solutions(session)
    if show_trace:
        _print_trace(session)


def _interactive_loop(session: Session) -> Session:
    while session.status == AWAITING:
        question = session.pending_question
        assert question is not None
        _print_question(question)
        line = click.prompt("> ", prompt_suffix="", default="", show_default=False)
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.lower() == "why":
            try:
                for node in why(session):
                    _print_node(node)
            except NoPendingQuestion as exc:
                click.echo(str(exc))
            continue
        if stripped.startswith("?"):
            name = stripped[1:].strip()
            try:
                _print_node(explain_rule(session, name))
            except RuleNotInTrace as exc:
                click.echo(str(exc))
            continue
        try:
            session.answer(question.id, parse_answer_text(question, stripped))
        except IllegalValue as exc:
            click.echo(f"{exc}; try again ('why' shows the reasoning)")
    return session


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--kb-dir", type=click.Path(), default=None,
              help="Directory of .kb files; defaults to the shipped corpus.")
@click.option("--store-dir", type=click.Path(), default="sessions",
              show_default=True, help="Session event-log directory.")
def serve(host: str, port: int, kb_dir: str | None, store_dir: str) -> None:
    """Serve the consultation wire API over HTTP."""
    store_dir = os.environ.get("LEDGERMIND_STORE") or store_dir
    try:
        service = SessionService.from_dirs(kb_dir, store_dir)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    for line in service.startup_reports:
        click.echo(f"startup: {line}", err=True)
    app = create_app(service)

    import uvicorn

    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)


@main.command()
@click.argument("kb")
@click.option("--script", "script_path", type=click.Path(), required=True)
@click.option("--out", "out_dir", type=click.Path(), default="report",
              show_default=True)
@click.option("--goal", "goals", multiple=True)
def report(kb: str, script_path: str, out_dir: str, goals: tuple[str, ...]) -> None:
    """Run a scripted consultation and write solutions.csv plus solutions.png."""
    parsed = _load_valid_kb(kb)
    if isinstance(parsed, int):
        sys.exit(parsed)
    try:
        answers = load_script(script_path)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    try:
        session = run_scripted(parsed, answers, list(goals) or None)
    except (UnknownGoal, IllegalValue) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except ScriptExhausted as exc:
        _print_question(exc.question)
        click.echo("error: script exhausted before the consultation finished",
                   err=True)
        sys.exit(4)
    csv_path, png_path = write_solutions_report(session, out_dir)
    _print_solutions(session)
    click.echo(f"\nwrote {csv_path}")
    click.echo(f"wrote {png_path}")


@main.command()
@click.argument("lots_file", type=click.Path())
@click.option("--quantity", required=True, help="Units to issue.")
@click.option("--out", "out_dir", type=click.Path(), default="report",
              show_default=True)
def costing(lots_file: str, quantity: str, out_dir: str) -> None:
    """Compare WAC, FIFO and LIFO issue costs for a lot ledger file."""
    try:
        ledger = read_lot_ledger(lots_file)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    except ValuationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    try:
        csv_path, png_path = write_costing_report(ledger, quantity, out_dir)
    except ValuationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"wrote {csv_path}")
    click.echo(f"wrote {png_path}")


if __name__ == "__main__":
    main()
