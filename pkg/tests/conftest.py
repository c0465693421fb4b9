from __future__ import annotations

import warnings

import pytest

from folialg.clifford import DisconnectedLeavesWarning


@pytest.fixture(autouse=True)
def _quiet_clifford():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DisconnectedLeavesWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    from support import ACCEPTANCE
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
