"""Shared pytest hooks: surface the acceptance gate lines in the summary."""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.write_line("")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
