import json
from pathlib import Path

import pytest

FROZEN_PATH = Path(__file__).with_name("frozen_values.json")
_VERDICT_LINES = []


@pytest.fixture(scope="session")
def frozen():
    return json.loads(FROZEN_PATH.read_text())


@pytest.fixture
def verdict():
    """Record a one-line PASS/FAIL summary shown at the end of the run."""

    def record(tag, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {tag}: {detail}"
        _VERDICT_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICT_LINES:
            terminalreporter.write_line(line)
