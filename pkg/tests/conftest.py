from pathlib import Path

import pytest

from pointer_sdp.graph import load_corpus

DATA = Path(__file__).parent / "data"


@pytest.fixture
def example_path():
    return DATA / "example.sdp"


@pytest.fixture
def example_graph(example_path):
    return load_corpus(example_path)[0]


ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(line)
