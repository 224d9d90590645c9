"""Shared pytest wiring.

The acceptance tests append one human-readable line per criterion here; the
summary hook prints them after the run so the gate's outcome is visible even
when pytest captures stdout.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
