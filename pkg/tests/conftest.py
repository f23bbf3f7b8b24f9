import os
import sys

sys.path.insert(0, os.path.dirname(__file__))


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance verdicts, one line per criterion."""
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.VERDICTS:
        terminalreporter.write_line(line)
