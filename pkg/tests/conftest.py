from __future__ import annotations

import sys
from pathlib import Path

import pytest

# make the oracle helpers importable as a plain module
sys.path.insert(0, str(Path(__file__).parent))

_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL/SKIP line for an acceptance criterion."""
    def report(number, status, detail):
        if isinstance(status, bool):
            status = "PASS" if status else "FAIL"
        line = f"{status} criterion {number}: {detail}"
        _LINES.append(line)
        print(line)
    return report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda ln: int(ln.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
