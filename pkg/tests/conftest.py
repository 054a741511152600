import os

import numpy as np
import pytest
from hypothesis import settings

from quasargen import encodings as enc
from quasargen import problems as pb

settings.register_profile("default", max_examples=25, deadline=None)
settings.register_profile("thorough", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("QG_HYPOTHESIS_PROFILE", "default"))


_acceptance_lines: list[str] = []


@pytest.fixture
def criterion_log():
    """Collector for acceptance-test verdict lines; they are echoed in the
    terminal summary so the one-line-per-criterion record survives output
    capture."""
    return _acceptance_lines.append


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_graph():
    return pb.erdos_renyi(4, 0.6, 5)


@pytest.fixture(scope="session")
def battery():
    """One small encoding per problem family, reused across tests."""
    return {
        "maxcut": enc.encode_maxcut(pb.erdos_renyi(4, 0.6, 5)),
        "mincut": enc.encode_mincut(pb.erdos_renyi(4, 0.6, 6)),
        "csp": enc.encode_max_k_csp(pb.random_csp(4, 5, 2, 7)),
        "mwbm": enc.encode_mwbm(pb.random_assignment(4, 8)),
        "tsp": enc.encode_tsp(pb.random_assignment(5, 9, problem="tsp")),
    }
