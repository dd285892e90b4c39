"""Shared pytest plumbing.

The acceptance tests record one human-readable pass/fail line per
criterion; pytest's file-descriptor capture would otherwise swallow them,
so they are replayed in a terminal-summary section at the end of the run.
"""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
