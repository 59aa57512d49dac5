import numpy as np
import pytest

from buildag.dag import WeightedDag

_ACCEPTANCE_LINES = []


@pytest.fixture
def d1():
    """Two parents (0 and 1) feeding one child (2)."""
    w = np.zeros((3, 3))
    w[2, 0] = 0.8
    w[2, 1] = -1.5
    return WeightedDag(w)


@pytest.fixture
def empty3():
    return WeightedDag(np.zeros((3, 3)))


def random_lower_dag(rng, n, p=0.4, lo=0.5, hi=2.0):
    """Independent DAG generator for property tests: random order, random signed weights."""
    mask = np.tril(rng.random((n, n)) < p, k=-1)
    w_low = np.where(mask, rng.choice([-1.0, 1.0], size=(n, n)) * rng.uniform(lo, hi, size=(n, n)), 0.0)
    perm = rng.permutation(n)
    w = np.zeros((n, n))
    w[np.ix_(perm, perm)] = w_low
    return WeightedDag(w)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = "PASS" if rep.outcome == "passed" else "FAIL"
        _ACCEPTANCE_LINES.append(f"[{status}] criterion {marker.args[0]}: {marker.args[1]}")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
