"""Shipped knowledge-base corpus and demo answer scripts."""

from __future__ import annotations

from pathlib import Path


def corpus_dir() -> Path:
    return Path(__file__).parent


def corpus_names() -> list[str]:
    return sorted(path.stem for path in corpus_dir().glob("*.kb"))


def kb_path(name: str) -> Path:
    return corpus_dir() / f"{name}.kb"


def demo_script_path(name: str) -> Path:
    return corpus_dir() / f"{name}.demo.answers"
