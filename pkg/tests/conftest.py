import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ledgermind.kbs import corpus_dir, kb_path
from ledgermind.parser import load_kb


@pytest.fixture(scope="session")
def shipped_dir() -> Path:
    return corpus_dir()


@pytest.fixture(scope="session")
def credit_kb():
    return load_kb(kb_path("credit_risk"))


@pytest.fixture(scope="session")
def valuation_kb():
    return load_kb(kb_path("valuation_advisor"))
