import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mpplan.netgraph import Topology  # noqa: E402
from mpplan.qot import QotParams  # noqa: E402
from mpplan.xcvr import default_catalog  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture(scope="session")
def qot():
    return QotParams()


@pytest.fixture
def line3():
    """A-B-C chain with two 80 km links."""
    return Topology(["A", "B", "C"], [("A", "B", 80.0), ("B", "C", 80.0)])


@pytest.fixture
def square():
    return Topology(["A", "B", "C", "D"],
                    [("A", "B", 100.0), ("B", "C", 100.0), ("C", "D", 100.0), ("A", "D", 150.0)])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
