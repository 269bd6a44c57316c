"""Shared plumbing: collects one verdict line per benchmark criterion and
echoes them as a terminal section at the end of the run."""

from typing import Callable, List

import pytest

_CRITERION_LINES: List[str] = []


@pytest.fixture
def criterion() -> Callable[[str, bool, str], None]:
    def record(name: str, ok: bool, details: str) -> None:
        _CRITERION_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {details}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    del exitstatus, config
    if _CRITERION_LINES:
        terminalreporter.section("benchmark criteria")
        for line in _CRITERION_LINES:
            terminalreporter.write_line(line)
