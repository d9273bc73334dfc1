import numpy as np
import pytest

from qmean import VectorSet

from reference_data import SET1_ANGLES, SET2_VECTORS


@pytest.fixture
def table1_set():
    return VectorSet.from_angles([[a] for a in SET1_ANGLES])


@pytest.fixture
def table2_set():
    return VectorSet(SET2_VECTORS)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_RESULTS

    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
