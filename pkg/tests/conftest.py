import os

import pytest

from uavfpg.config import default_config, replace


@pytest.fixture(autouse=True)
def _no_llm_key(monkeypatch):
    # the suite must never pick up real credentials from the environment
    monkeypatch.delenv("FPG_LLM_API_KEY", raising=False)


@pytest.fixture
def cfg():
    return default_config()


@pytest.fixture
def small_cfg():
    return replace(default_config(), **{"world.episode_steps": 50})


GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


# acceptance criteria report lines, printed once at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
