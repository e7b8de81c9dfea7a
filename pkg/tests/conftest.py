import sys


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdict lines, which are otherwise hidden by output capture."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "VERDICTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
