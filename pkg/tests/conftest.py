import numpy as np
import pytest
from hypothesis import settings

from ranklimits.model import LinkFunction, ProbMatrix, build_sst_matrix, uniform_gap_qualities

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def half_matrix(n: int) -> ProbMatrix:
    """All off-diagonal entries 1/2, built through a flat table link."""
    flat = LinkFunction.table([(-1.0, 0.5), (1.0, 0.5)])
    return build_sst_matrix(uniform_gap_qualities(n, 1.0), flat)


def logistic_matrix(n: int, scale: float) -> ProbMatrix:
    return build_sst_matrix(uniform_gap_qualities(n, scale), LinkFunction.logistic())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance outcomes are collected here and echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
