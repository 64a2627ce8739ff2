from __future__ import annotations

import pytest

from habitlearn.simlab import RunConfig, run_sequential, run_stationary
from oracles import exact_model, menu_stream


@pytest.fixture
def menu_seqs():
    return menu_stream()


@pytest.fixture
def menu_exact():
    return exact_model(menu_stream())


@pytest.fixture(scope="session")
def stationary_report():
    return run_stationary(RunConfig.stationary(seed=42))


@pytest.fixture(scope="session")
def stationary_report_k2():
    return run_stationary(RunConfig.stationary(seed=42, order=2))


@pytest.fixture(scope="session")
def sequential_report():
    return run_sequential(RunConfig.sequential(seed=42))


# -- acceptance summary ------------------------------------------------------

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _ACCEPTANCE[report.nodeid.split("::")[-1]] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        status = "PASS" if _ACCEPTANCE[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")

