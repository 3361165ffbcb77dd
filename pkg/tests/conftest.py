import numpy as np
import pytest

from lipfree.experiments import make_rng


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture
def square():
    # unit square corners with the l1 metric
    xy = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    return np.abs(xy[:, None, :] - xy[None, :, :]).sum(-1)


_ACCEPTANCE_LINES = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        for line in report.capstdout.splitlines():
            if line.startswith(("PASS [", "FAIL [")):
                _ACCEPTANCE_LINES.append(line)
        if report.failed and not any(report.nodeid in l for l in _ACCEPTANCE_LINES):
            _ACCEPTANCE_LINES.append(f"FAIL {report.nodeid}")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
