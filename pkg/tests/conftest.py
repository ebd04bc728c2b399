import sys

import pytest
from mpmath import mp, mpf

from partheta.numerics import DEFAULT_CONTEXT


def direct_theta(q, x, dps=80):
    """Independent oracle: plain partial summation of theta at ``dps`` digits."""
    with mp.workdps(dps):
        q, x = mpf(q), mpf(x)
        total, t, n = mpf(0), mpf(1), 0
        while True:
            total += t
            n += 1
            t *= q**n * x
            if n > 10 and abs(t) < mpf(10) ** (-dps - 5):
                return +total


def direct_theta_dx(q, x, dps=80):
    with mp.workdps(dps):
        q, x = mpf(q), mpf(x)
        total, n = mpf(0), 1
        while True:
            t = n * q ** (n * (n + 1) // 2) * x ** (n - 1)
            total += t
            n += 1
            if n > 10 and abs(t) < mpf(10) ** (-dps - 5):
                return +total


@pytest.fixture
def ctx():
    return DEFAULT_CONTEXT


def hp(value, dps=80) -> mpf:
    """mpf literal parsed at ``dps`` digits (the global context keeps 15)."""
    with mp.workdps(dps):
        return mpf(value)


def err(a, b, dps=80) -> mpf:
    """|a - b| computed at ``dps`` digits."""
    with mp.workdps(dps):
        return abs(hp(a, dps) - hp(b, dps))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.VERDICTS):
        terminalreporter.write_line(mod.VERDICTS[n])
