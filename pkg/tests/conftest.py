import numpy as np
import pytest

from homoscope.csbmh import CsbmhParams

# filled by tests/test_acceptance.py: criterion -> (passed, detail)
ACCEPTANCE_RESULTS = {}


@pytest.fixture
def standard_params():
    return CsbmhParams([-1.0, 0.0], [0.0, 1.0], 1.0, 2.0, 5.0, 5.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")
