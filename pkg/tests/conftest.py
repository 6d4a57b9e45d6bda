"""Shared fixtures, plus a terminal summary for the acceptance scoreboard."""

import pytest

_SCOREBOARD: list[str] = []


@pytest.fixture
def criterion_report():
    """Record one scoreboard line; it is printed now and again in the summary."""

    def record(line: str) -> None:
        _SCOREBOARD.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _SCOREBOARD:
        return
    terminalreporter.section("acceptance criteria")
    for line in _SCOREBOARD:
        terminalreporter.write_line(line)
