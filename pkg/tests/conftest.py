from __future__ import annotations

import numpy as np
import pytest

from qhecss.css_code import identity_code, steane_code

_criteria: list[tuple[str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(text): acceptance criterion covered by the test")


@pytest.fixture(scope="session")
def steane():
    return steane_code()


@pytest.fixture(scope="session")
def identity():
    return identity_code()


@pytest.fixture
def rng(request):
    # distinct but reproducible stream per test
    seed = sum(map(ord, request.node.nodeid))
    return np.random.default_rng(seed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = "PASS" if rep.outcome == "passed" else "FAIL"
        _criteria.append((status, f"{marker.args[0]} [{item.name}]"))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for status, text in _criteria:
        terminalreporter.write_line(f"{status}  {text}")
