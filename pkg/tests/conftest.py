import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from boxes_sim.experiment import build_scenario  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def scenario():
    return build_scenario({})


@pytest.fixture
def report():
    """Record one pass/fail line for the acceptance summary."""

    def _report(criterion, passed, measured):
        line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {measured}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
