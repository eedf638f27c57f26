"""Shared pytest wiring.

Tests marked ``@pytest.mark.acceptance(num, title)`` are collected into a
one-line-per-check summary printed after the run, so the release gate can
be read off the terminal without scrolling through the full log.
"""

import numpy as np
import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(num, title): numbered release-gate check, reported in the summary",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    num, title = mark.args
    if rep.when == "call":
        _RESULTS[(int(num), title)] = rep.passed
    elif rep.failed:  # setup/teardown error counts as a failure of the check
        _RESULTS[(int(num), title)] = False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance checks")
    for (num, title), ok in sorted(_RESULTS.items()):
        status = "PASSED" if ok else "FAILED"
        terminalreporter.write_line(f"ACCEPTANCE {num} ({title}): {status}")


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
