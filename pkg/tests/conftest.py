"""Shared pytest plumbing: surface acceptance PASS/FAIL lines in the summary."""

acceptance_log = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_log:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log:
            terminalreporter.write_line(line)
