import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
REPO_ROOT = TESTS_DIR.parent.parent
BANKS_FIXTURE = REPO_ROOT / "data" / "sentence_banks.json"

sys.path.insert(0, str(TESTS_DIR))

from service_harness import RunningService  # noqa: E402

from scorer_service.stub import StubBackend, StubConfig, load_banks  # noqa: E402


@pytest.fixture(scope="session")
def banks_path() -> Path:
    assert BANKS_FIXTURE.exists(), "shared sentence-bank fixture missing"
    return BANKS_FIXTURE


@pytest.fixture
def stub_service(banks_path):
    backend = StubBackend(StubConfig(seed=7, banks=load_banks(banks_path)))
    with RunningService(backend) as url:
        yield url


@pytest.fixture
def stub_service_factory(banks_path):
    """Start extra service instances with custom stub settings."""
    import contextlib

    stack = contextlib.ExitStack()

    def start(**kwargs) -> str:
        kwargs.setdefault("banks", load_banks(banks_path))
        backend = StubBackend(StubConfig(**kwargs))
        return stack.enter_context(RunningService(backend))

    yield start
    stack.close()
