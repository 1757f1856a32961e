import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import criteria_log  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if criteria_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(criteria_log.LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
