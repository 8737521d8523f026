import math

import numpy as np
import pytest

from teleportability.qmath import QState


@pytest.fixture
def rng():
    return np.random.default_rng(20201016)


def random_state(rng, dim):
    """Random full-rank density matrix from a Ginibre matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return QState(m / np.trace(m))


def random_bloch(rng):
    from teleportability.states import BlochParam

    return BlochParam(math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi))


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        doc = report.user_properties and dict(report.user_properties).get("criterion")
        _acceptance.append((doc or report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
