import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from partheta import theta
from partheta.numerics import to_mpf
from partheta.theta import ThetaQuery

from .conftest import direct_theta, direct_theta_dx, err

# frozen from direct 80-digit partial summation (tests/conftest.py oracle)
THETA_HALF_MINUS_ONE = "0.6103215180482664259240487820906285649835"
# frozen from an 80-digit secant solve of theta' on the direct series, q = 0.3
CRIT_03 = [
    "-7.838011149374855274376936396858037172565",
    "-26.5094934740219602940945972716631498906",
    "-95.46262464819985879585419900396600652839",
    "-334.2572264512609079754988290180639803664",
    "-1152.963547855841057666629178068462003358",
]


def test_query_rejects_boundary():
    for q in (0, 1, -0.1, 1.5):
        with pytest.raises(ValueError):
            ThetaQuery(q, 1)


def test_eval_at_zero(ctx):
    assert theta.theta_eval(ThetaQuery("0.5", 0), ctx).value == 1


def test_eval_half_minus_one(ctx):
    r = theta.theta_eval(ThetaQuery("0.5", -1), ctx)
    assert err(r.value, THETA_HALF_MINUS_ONE) < mpf("1e-39")
    assert r.tail_bound <= ctx.tail_tolerance
    # oracle summed to 60 terms
    with mp.workdps(80):
        s = sum(mpf("0.5") ** (j * (j + 1) // 2) * (-1) ** j for j in range(60))
    assert err(r.value, s) < mpf("1e-39")


def test_eval_published_double_zero(ctx):
    q = ThetaQuery("0.3092493386", "-7.5032559833")
    assert abs(theta.theta_eval(q, ctx).value) < mpf("1e-8")
    assert abs(theta.theta_dx(q, ctx).value) < mpf("1e-8")


def test_dx_at_zero(ctx):
    assert theta.theta_dx(ThetaQuery("0.5", 0), ctx).value == mpf("0.5")


def test_dx_finite_difference(ctx):
    q, x = to_mpf("0.3", ctx), to_mpf("-2", ctx)
    d = theta.theta_dx(ThetaQuery(q, x), ctx).value
    with ctx.workdps(10):
        h = mpf("1e-10")
        fd = (theta.theta(q, x + h, ctx) - theta.theta(q, x - h, ctx)) / (2 * h)
        assert abs(fd - d) / abs(d) < mpf("1e-15")


@pytest.mark.parametrize("q,x", [("0.3", "-2"), ("0.7", "-13"), ("0.9", "4")])
def test_derivatives_match_oracle(ctx, q, x):
    jet = theta.theta_jet(q, x, ctx)
    assert err(jet.value, direct_theta(q, x)) < mpf("1e-38") * max(1, abs(jet.value))
    assert err(jet.dx, direct_theta_dx(q, x)) < mpf("1e-38") * max(1, abs(jet.dx))


def test_dxx_sign_at_critical_points(ctx):
    for c in theta.critical_points(to_mpf("0.2", ctx), 3, ctx):
        dxx = theta.theta_dxx(ThetaQuery(mpf("0.2"), c.location), ctx).value
        assert (dxx > 0) == (c.kind == "minimum")


def test_functional_equation_exact_at_zero(ctx):
    assert theta.functional_equation_residual(ThetaQuery("0.5", 0), ctx) == 0


@pytest.mark.parametrize("q,x", [("0.7", "-5"), ("0.95", "10")])
def test_functional_equation(ctx, q, x):
    assert theta.functional_equation_residual(ThetaQuery(q, x), ctx) < 3 * ctx.tail_tolerance
    # both sides by the independent summation
    with mp.workdps(80):
        lhs = direct_theta(q, x)
        rhs = 1 + mpf(q) * mpf(x) * direct_theta(q, mpf(q) * mpf(x))
        assert abs(lhs - rhs) < 3 * ctx.tail_tolerance


def test_functional_equation_random_grid(ctx):
    rng = random.Random(11)
    for _ in range(100):
        q = to_mpf(rng.uniform(0.01, 0.99), ctx)
        x = to_mpf(rng.uniform(-50, 50), ctx)
        assert theta.functional_equation_residual(ThetaQuery(q, x), ctx) <= 3 * ctx.tail_tolerance


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0, 1000))
def test_positive_for_nonnegative_x(q, x):
    assert theta.theta(q, x) > 0


def test_first_zero_bracket(ctx):
    q = to_mpf("0.2", ctx)
    (z,) = theta.real_zeros(q, 1, ctx)
    with ctx.workdps(10):
        assert -q ** (-mpf(3) / 2) < z.location < -1 / q
    assert err(z.location, "-6.700760910099115058454291864087343362578") < mpf("1e-29")
    assert z.residual <= 10 * ctx.tail_tolerance
    assert z.bracket[0] < z.location < z.bracket[1]


def test_zero_sign_scan(ctx):
    """xi_1 at q = 0.2 sits in the one sign-change cell of a 0.01 scan."""
    q = mpf("0.2")
    xs = [mpf(-5) - mpf(i) / 100 for i in range(620)]
    vals = [direct_theta(q, x, 30) for x in xs]
    cells = [(xs[i + 1], xs[i]) for i in range(len(xs) - 1) if vals[i] * vals[i + 1] < 0]
    (z,) = theta.real_zeros(to_mpf("0.2", ctx), 1, ctx)
    assert len(cells) == 1 and cells[0][0] < z.location < cells[0][1]


def test_zeros_ordered(ctx):
    zs = theta.real_zeros(to_mpf("0.2", ctx), 4, ctx)
    locs = [z.location for z in zs]
    assert all(a > b for a, b in zip(locs, locs[1:]))
    assert locs[0] < 0
    assert [z.status for z in zs] == ["simple"] * 4


def test_zeros_near_double_zero(ctx):
    zs = theta.real_zeros(to_mpf("0.3092493386", ctx), 2, ctx)
    assert abs(zs[0].location - zs[1].location) < mpf("1e-4")
    for z in zs:
        assert abs(z.location - mpf("-7.5032559833")) < mpf("1e-4")


def test_zeros_past_first_spectral_value(ctx):
    zs = theta.real_zeros(to_mpf("0.4", ctx), 4, ctx)
    assert [z.status for z in zs[:2]] == ["complex", "complex"]
    assert [z.status for z in zs[2:]] == ["simple", "simple"]


def test_critical_sign_pattern(ctx):
    crit = {c.kind: c for c in theta.critical_points(to_mpf("0.2", ctx), 1, ctx)}
    assert crit["minimum"].theta_value < 0 < crit["maximum"].theta_value


def test_critical_recursion_quarter(ctx):
    q = to_mpf("0.25", ctx)
    c = {(r.index, r.kind): r.location for r in theta.critical_points(q, 2, ctx)}
    with ctx.workdps(10):
        assert c[(2, "minimum")] <= c[(1, "maximum")] / q
        assert c[(1, "maximum")] <= c[(1, "minimum")] / q


def test_critical_points_golden(ctx):
    q = to_mpf("0.3", ctx)
    locs = [c.location for c in theta.critical_points(q, 3, ctx)]
    assert len(locs) == 6
    for got, want in zip(sorted(locs, reverse=True), CRIT_03):
        assert err(got, want) < ctx.root_tolerance * max(1, abs(got))


def test_critical_golden_section(ctx):
    """t_1 at q = 0.3 against an independent golden-section minimization."""
    with mp.workdps(50):
        q = mpf("0.3")
        lo, hi = -q**-2, -q**-1
        f = lambda x: direct_theta(q, x, 50)
        g = (mp.sqrt(5) - 1) / 2
        a, b = lo, hi
        while b - a > mpf("1e-20"):
            c, d = b - g * (b - a), a + g * (b - a)
            if f(c) < f(d):
                b = d
            else:
                a = c
        oracle = (a + b) / 2
    t1 = theta.locate_critical(to_mpf("0.3", ctx), 1, "minimum", ctx)[0]
    # golden section resolves a minimum to about sqrt(eps) of its bracket
    assert err(t1, oracle) < mpf("1e-15")


def test_product_at_zero(ctx):
    assert theta.theta_product_eval("0.2", 0, [], ctx) == 1


def test_product_truncation(ctx):
    q = to_mpf("0.2", ctx)
    zs = theta.real_zeros(q, 8, ctx)
    p = theta.theta_product_eval(q, -1, zs, ctx)
    v = theta.theta(q, -1, ctx)
    assert abs(p - v) / abs(v) < mpf("1e-4")
    assert theta.theta_product_eval(q, zs[0].location, zs, ctx) == 0


def test_bound_property_sample():
    q = mpf("0.5")
    for s in (1, 5, 10):
        with mp.workdps(120):
            v = direct_theta(q, -q ** (-s), 120)
            assert 0 < v < q**s


def test_katsnelson_direction(ctx):
    devs = [abs(theta.theta(to_mpf(q, ctx), -20, ctx) - mpf(1) / 21) for q in ("0.9", "0.99")]
    assert devs[1] < devs[0]
