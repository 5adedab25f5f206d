"""Scripted consultation driving and file reports.

A script is one answer per line in the order questions arrive; blank
lines and ``#`` comments are skipped, ``UNKNOWN`` declares ignorance.
Report writers put a delimited table and a rendered figure side by side
in the output directory.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .engine import AWAITING, Question, Session, UNKNOWN, start_session
from .model import KnowledgeBase, ModeKind
from .valuation import CostingMethod, LotLedger, issue_cost, money


class ScriptExhausted(Exception):
    def __init__(self, question: Question):
        self.question = question
        super().__init__(f"script ran out before question {question.id} "
                         f"about '{question.subject}'")


def parse_answer_text(question: Question, text: str):
    """Turn one script or console line into an engine answer value."""
    stripped = text.strip()
    if stripped.upper() == "UNKNOWN":
        return UNKNOWN
    if question.options is not None:
        labels = []
        for part in stripped.split(","):
            part = part.strip()
            if not part:
                continue
            if part.isdigit() and 1 <= int(part) <= len(question.options):
                labels.append(question.options[int(part) - 1])
            else:
                labels.append(part)
        return labels
    return stripped  # the engine parses numerics and accepts text


def load_script(path: str | Path) -> list[str]:
    lines = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            lines.append(stripped)
    return lines


def run_scripted(kb: KnowledgeBase, answers: list[str],
                 goals: list[str] | None = None) -> Session:
    """Drive a whole consultation from scripted answers."""
    session = start_session(kb, goals)
    cursor = 0
    while session.status == AWAITING:
        question = session.pending_question
        assert question is not None
        if cursor >= len(answers):
            raise ScriptExhausted(question)
        session.answer(question.id, parse_answer_text(question, answers[cursor]))
        cursor += 1
    return session


_SCALE_SUFFIX = {
    ModeKind.YES_NO: "/1",
    ModeKind.SCALE_0_10: "/10",
    ModeKind.SCALE_NEG100_POS100: "/+100",
    ModeKind.FUZZY: "/1",
}


def format_confidence(kb: KnowledgeBase, value: float) -> str:
    suffix = _SCALE_SUFFIX.get(kb.mode.kind, "")
    return f"{value:g}{suffix}"


def write_solutions_report(session: Session, out_dir: str | Path,
                           stem: str = "solutions") -> tuple[Path, Path]:
    """Write the ranked solutions as ``<stem>.csv`` plus a bar figure."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [
        (choice, statement, combined.value, session.kb.mode.kind.value)
        for choice, statement, combined in session.solutions()
    ]
    csv_path = out / f"{stem}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["choice", "statement", "confidence", "mode"])
        writer.writerows(rows)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, max(2.0, 0.6 * len(rows) + 1)))
    if rows:
        names = [row[0] for row in reversed(rows)]
        values = [row[2] for row in reversed(rows)]
        ax.barh(names, values, color="#3b6ea5")
        ax.set_xlabel("confidence")
    else:
        ax.text(0.5, 0.5, "no recommendation reached",
                ha="center", va="center", transform=ax.transAxes)
        ax.set_axis_off()
    ax.set_title(session.kb.title or "consultation result")
    fig.tight_layout()
    png_path = out / f"{stem}.png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return csv_path, png_path


def write_costing_report(ledger: LotLedger, quantity, out_dir: str | Path,
                         stem: str = "costs") -> tuple[Path, Path]:
    """Compare the three issue-costing methods on one ledger."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for method in CostingMethod:
        cost, remaining = issue_cost(ledger, quantity, method)
        rows.append((method.value, cost, money(remaining.total_value()),
                     len(remaining.lots)))
    csv_path = out / f"{stem}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["method", "issue_cost", "remaining_value", "remaining_lots"])
        writer.writerows(rows)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([row[0] for row in rows], [float(row[1]) for row in rows],
           color=["#3b6ea5", "#6ea53b", "#a53b6e"])
    ax.set_ylabel("issue cost")
    ax.set_title(f"issue of {quantity} units by costing method")
    fig.tight_layout()
    png_path = out / f"{stem}.png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return csv_path, png_path
