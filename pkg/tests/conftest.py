import numpy as np
import pytest

from kgtube.dispersion import WaveguideParams


@pytest.fixture
def unit():
    return WaveguideParams(1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
