import os

import pytest
from hypothesis import settings

from thzcov.params import SystemParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def ref_params():
    return SystemParams()


def pytest_configure(config):
    config._acceptance = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, ok, detail)``."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config._acceptance[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
