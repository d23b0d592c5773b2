import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from casimir_graphene import GrapheneParams, LayerStack  # noqa: E402


@pytest.fixture(scope="session")
def gapless():
    return GrapheneParams()


@pytest.fixture(scope="session")
def sheet(gapless):
    return LayerStack(graphene=gapless)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
