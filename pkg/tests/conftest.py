from pathlib import Path

import pytest

from mdchase.language import parse_mds
from mdchase.model import Instance, Schema

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"

CHAIN_MDS = "m1: R[A] = R[A] -> R[B] == R[B]\nm2: R[B] = R[B] -> R[C] == R[C]\n"
PAIR_MDS = "m: R[A] = R[A] -> R[B] == R[B]\n"


def cascade_setup():
    schema = Schema({"R": ["A", "B", "C"]})
    d = Instance.from_rows(schema, {"R": [["a", "b", "d"], ["a", "c", "e"], ["a", "b", "e"]]})
    d1 = Instance.from_rows(schema, {"R": [["a", "b", "d"]] * 3})
    d2 = Instance.from_rows(schema, {"R": [["a", "b", "e"]] * 3})
    return d, d1, d2, parse_mds(CHAIN_MDS, schema=schema)


def pair_setup():
    schema = Schema({"R": ["A", "B"]})
    d = Instance.from_rows(schema, {"R": [["a", "b"], ["a", "c"]]})
    return d, parse_mds(PAIR_MDS, schema=schema)


@pytest.fixture
def cascade():
    return cascade_setup()


@pytest.fixture
def pair():
    return pair_setup()


@pytest.fixture
def corpus():
    return CORPUS


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
