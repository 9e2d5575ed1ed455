import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from satgraph.graph import make_node_split, two_block_sbm

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def cora_dir() -> Path:
    return Path(os.environ.get("SATGRAPH_CORA_DIR", Path(__file__).resolve().parents[1] / "data" / "cora"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def sbm():
    graph = two_block_sbm(seed=0)
    return graph, make_node_split(graph, seed=0)


# one PASS/FAIL line per acceptance criterion, echoed at the end of the run
CRITERIA = {}


@pytest.fixture
def criterion():
    def record(number, passed, detail):
        line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} | {detail}"
        CRITERIA[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[number])
