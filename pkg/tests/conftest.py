"""Pytest wiring: collects acceptance-criterion verdicts and prints them in a
dedicated terminal section at the end of the run, one line per criterion."""

from __future__ import annotations

import pytest

_lines: list[str] = []


@pytest.fixture
def criterion_report():
    """Record one acceptance line: ``criterion N (<name>): PASS/FAIL — detail``."""

    def record(number: int, name: str, ok: bool, detail: str) -> None:
        verdict = "PASS" if ok else "FAIL"
        _lines.append(f"criterion {number} ({name}): {verdict} - {detail}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_lines):
            terminalreporter.write_line(line)
