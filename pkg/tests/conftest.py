import warnings

import pytest

from fqt.model import SystemParams

# acceptance results are collected here and echoed in the terminal summary
ACCEPTANCE = {}


@pytest.fixture(autouse=True)
def _quiet_regime_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="temperatures are not small")
        warnings.filterwarnings("ignore", message="closed forms assume")
        warnings.filterwarnings("ignore", message="lambda=.* outside the weak-modulation")
        yield


@pytest.fixture
def params():
    return SystemParams()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
