import math

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def rel_err(a, b, floor=0.0):
    scale = max(abs(a), abs(b), floor)
    return 0.0 if scale == 0 else abs(a - b) / scale


def assert_rel(a, b, tol, floor=0.0):
    err = rel_err(a, b, floor)
    assert err <= tol, f"{a!r} vs {b!r}: relative error {err:.3e} > {tol:g}"


@pytest.fixture
def half_pi():
    return math.pi / 2


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
