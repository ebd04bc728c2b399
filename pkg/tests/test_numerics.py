import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from partheta.numerics import (
    DEFAULT_CONTEXT,
    PrecisionBudgetError,
    PrecisionContext,
    SameSignError,
    bracket_root,
    math_constants,
    sum_ratio_bounded_series,
    to_mpf,
)
from partheta import psi

from .conftest import direct_theta


def test_context_defaults():
    c = DEFAULT_CONTEXT
    assert c.working_digits == 60
    assert c.tail_tolerance == mpf("1e-40")
    assert c.root_tolerance == mpf("1e-30")


@pytest.mark.parametrize(
    "args",
    [
        (20, "1e-10", "1e-5"),  # too few digits
        (60, "1e-70", "1e-30"),  # tail below noise
        (60, "1e-40", "1e-45"),  # root tighter than tail
        (60, "0", "1e-30"),
    ],
)
def test_context_rejects(args):
    with pytest.raises(ValueError):
        PrecisionContext(*args)


def test_with_digits_keeps_headroom():
    c = PrecisionContext.with_digits(60)
    assert c == DEFAULT_CONTEXT
    c = PrecisionContext.with_digits(30)
    assert c.tail_tolerance == mpf(10) ** -20
    assert c.root_tolerance == mpf(10) ** -15


def test_to_mpf_uses_context_precision(ctx):
    x = to_mpf("0.1", ctx)
    with mp.workdps(80):
        assert abs(x - mpf("0.1")) < mpf(10) ** -60


def test_zero_series(ctx):
    r = sum_ratio_bounded_series(lambda n: mpf(0), 0, ctx)
    assert r.value == 0 and r.tail_bound == 0


def test_geometric_half(ctx):
    r = sum_ratio_bounded_series(lambda n: mpf(1) / 2**n, 0, ctx)
    assert abs(r.value - 2) <= ctx.tail_tolerance
    assert r.tail_bound <= ctx.tail_tolerance


def test_theta_terms_match_partial_sum(ctx):
    q = to_mpf("0.3", ctx)
    r = sum_ratio_bounded_series(lambda n: q ** (n * (n + 1) // 2), 0, ctx)
    with mp.workdps(80):
        oracle = sum(mpf("0.3") ** (n * (n + 1) // 2) for n in range(200))
    assert abs(r.value - oracle) <= ctx.tail_tolerance
    # frozen from the same oracle
    assert abs(r.value - direct_theta("0.3", 1)) <= ctx.tail_tolerance
    assert mp.nstr(r.value, 20) == "1.327734919259369641"


def test_ratio_tail_bound(ctx):
    q = to_mpf("0.9", ctx)
    with ctx.workdps(10):
        r = sum_ratio_bounded_series(lambda n: q**n, 0, ctx, ratio=q)
        assert abs(r.value - 10) <= r.tail_bound <= ctx.tail_tolerance


def test_ratio_rejected(ctx):
    with pytest.raises(ValueError):
        sum_ratio_bounded_series(lambda n: mpf(0), 0, ctx, ratio=1)


def test_budget(ctx):
    with pytest.raises(PrecisionBudgetError):
        sum_ratio_bounded_series(lambda n: mpf(1), 0, ctx, max_terms=50)


def test_root_linear(ctx):
    assert abs(bracket_root(lambda x: x, -1, 2, ctx)) <= ctx.root_tolerance


def test_root_sqrt2(ctx):
    with ctx.workdps(10):
        r = bracket_root(lambda x: x * x - 2, 1, 2, ctx)
        assert abs(r - mp.sqrt(2)) <= ctx.root_tolerance


def test_root_same_sign(ctx):
    with pytest.raises(SameSignError):
        bracket_root(lambda x: x * x + 1, -1, 1, ctx)


def test_root_psi_lambda_sign_scan():
    """The unique interior root of psi(sqrt q) - lambda_3(q) against a dense scan."""
    ctx = PrecisionContext.with_digits(30)

    def f(q):
        with ctx.workdps(10):
            return psi.psi_eval(mp.sqrt(q), "series", ctx).psi - psi.lambda_s(q, 3, ctx)

    # independent float scan of (0, 0.99) at step 1e-4; beyond 0.99 both
    # sides underflow double precision
    qs = np.arange(1e-4, 0.99, 1e-4)
    j = np.arange(0, 60)[:, None]
    sign = np.where(j % 2, -1.0, 1.0)
    psi_f = (sign * qs[None, :] ** (j * j / 2.0)).sum(axis=0) * 2 - 1
    lam_f = (np.where(j >= 6, sign, 0.0) * qs[None, :] ** (j * j / 2.0)).sum(axis=0)
    diff = np.sign(psi_f - lam_f)
    cells = np.nonzero(diff[:-1] * diff[1:] < 0)[0]
    assert len(cells) == 1
    lo, hi = (to_mpf(float(qs[i]), ctx) for i in (cells[0], cells[0] + 1))
    root = bracket_root(f, lo, hi, ctx)
    assert abs(root - mpf("0.6249518807490582522415747894677")) < mpf("1e-14")


def test_root_halving_invariance():
    c1 = PrecisionContext(60, mpf("1e-40"), mpf("1e-30"))
    c2 = PrecisionContext(60, mpf("1e-40"), mpf("5e-31"))
    f = lambda x: mp.cos(x) - x
    assert abs(bracket_root(f, 0, 1, c1) - bracket_root(f, 0, 1, c2)) <= 2 * c1.root_tolerance


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=-5, max_value=5), st.floats(min_value=0.01, max_value=3))
def test_root_stays_in_bracket(c, w):
    ctx = DEFAULT_CONTEXT
    lo, hi = c - w, c + 2 * w
    r = bracket_root(lambda x: (x - c) ** 3, lo, hi, ctx)
    assert lo <= r <= hi
    assert abs(r - c) < mpf("1e-9")


def test_math_constants(ctx):
    k = math_constants(ctx)
    assert mp.nstr(k.D, 10) == "2.426847731"
    assert mp.nstr(k.e_pi, 10) == "23.14069263"
