"""Shared fixtures and the acceptance-criteria reporting hook."""
from __future__ import annotations

import pytest

from hostpar.params import CASE_SETS, PRESETS

#: Filled by tests/test_acceptance.py; one entry per criterion.
ACCEPTANCE_LOG: list[tuple[str, bool, str]] = []


def record_criterion(name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LOG.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_LOG:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")


@pytest.fixture(scope="session")
def fig4():
    return PRESETS["fig4"]


@pytest.fixture(scope="session")
def fig5a():
    return PRESETS["fig5a"]


@pytest.fixture(scope="session")
def fig5b():
    return PRESETS["fig5b"]


@pytest.fixture(scope="session")
def fig7():
    return PRESETS["fig7"]


@pytest.fixture(scope="session")
def case1():
    return CASE_SETS["case1"]


@pytest.fixture(scope="session")
def case3():
    return CASE_SETS["case3"]
