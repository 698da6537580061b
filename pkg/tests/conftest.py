import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent

sys.path.insert(0, str(REPO_ROOT / "tests"))


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return REPO_ROOT / "data"


@pytest.fixture(scope="session")
def synthetic_corpus_path(data_dir: Path) -> Path:
    return data_dir / "synthetic20.jsonl"


@pytest.fixture(scope="session")
def banks_fixture_path(data_dir: Path) -> Path:
    return data_dir / "sentence_banks.json"
