import os
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from rosenfrac import field_setup

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def F4():
    return field_setup(4)


@pytest.fixture(scope="session")
def F5():
    return field_setup(5)


@pytest.fixture(scope="session")
def F6():
    return field_setup(6)


def frac(s):
    return Fraction(s)


def pytest_configure(config):
    config.acceptance_lines = {}


@pytest.fixture
def verdict(request):
    """Record the one-line outcome of an acceptance criterion."""
    def record(n, ok, text):
        line = f"[{n:2d}] {'PASS' if ok else 'FAIL'}  {text}"
        request.config.acceptance_lines[n] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
