"""Print the acceptance lines at the end of the run so they land in the log."""

from __future__ import annotations


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS, _line
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(_line(k))
