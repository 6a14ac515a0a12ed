import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from beliefweb import fixtures  # noqa: E402


@pytest.fixture
def fig1():
    return fixtures.fig1_system()


@pytest.fixture
def fig1_indep():
    return fixtures.fig1_indep_system()


@pytest.fixture
def fig1_path():
    return str(fixtures.bundled_path("fig1.json"))


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(acceptance_log.RESULTS):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
