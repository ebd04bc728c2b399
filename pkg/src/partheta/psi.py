"""psi(q) = 1 + 2 sum (-1)^j q^(j^2) and its companions.

lambda_s, chi_s, tau, h = h1 + h2, zeta_k, the partial sums S_l and the
estimator K_est of the linear coefficient in the expansion of tau at q = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf

from .numerics import (
    DEFAULT_CONTEXT,
    MAX_TERMS,
    PrecisionBudgetError,
    PrecisionContext,
    SeriesResult,
    sum_ratio_bounded_series,
    to_mpf,
)

ROUTES = ("series", "product", "modular")


def _check_q(q, ctx: PrecisionContext = DEFAULT_CONTEXT, allow_zero=True) -> mpf:
    q = to_mpf(q, ctx)
    lower_ok = q >= 0 if allow_zero else q > 0
    if not (lower_ok and q < 1):
        raise ValueError(f"q must lie in [0, 1), got {q}")
    return q


def _check_budget(q, ctx):
    if q >= 1 - mpf(10) ** (-ctx.working_digits / 4):
        raise PrecisionBudgetError(f"q={mpmath.nstr(q, 20)} is inside the flat region at q=1")


def _lost_digits(q) -> int:
    """Decimal digits cancelled when summing the psi series at q."""
    if q < 0.5:
        return 0
    a = -math.log(float(q))
    return int((math.pi**2 / (4 * a) - math.log(2 * math.sqrt(math.pi / a))) / math.log(10)) + 2


def _scaled(ctx: PrecisionContext, extra: int) -> PrecisionContext:
    if extra <= 0:
        return ctx
    shift = mpf(10) ** (-extra)
    return PrecisionContext(
        ctx.working_digits + extra, ctx.tail_tolerance * shift, ctx.root_tolerance * shift
    )


@dataclass(frozen=True)
class PsiValue:
    q: mpf
    psi: mpf
    via: str
    tail_bound: mpf = mpf(0)


def psi_series(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SeriesResult:
    """Alternating theta-null series; precision is raised by the cancelled digits."""
    q = _check_q(q, ctx)
    if q == 0:
        return SeriesResult(mpf(1), mpf(0), 1)
    sctx = _scaled(ctx, _lost_digits(q))
    with sctx.workdps(10):
        q = mpf(q)
        start = max(1, math.ceil((math.log(2) / -math.log(float(q)) - 1) / 2))

        def term(j):
            if j == 0:
                return mpf(1)
            t = 2 * q ** (j * j)
            return -t if j % 2 else t

        return sum_ratio_bounded_series(term, start, sctx)


def psi_product(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SeriesResult:
    """Truncated Jacobi product prod (1 - q^j)/(1 + q^j).

    The tail bound is relative: the omitted factors multiply the result by
    ``exp(-e)`` with ``0 <= e <= tail_bound``.
    """
    q = _check_q(q, ctx)
    if q == 0:
        return SeriesResult(mpf(1), mpf(0), 0)
    tol = ctx.tail_tolerance
    with ctx.workdps(15):
        q = mpf(q)
        bound_factor = 2 / ((1 - q) * (1 - q * q))
        p = mpf(1)
        qj = q
        j = 1
        while True:
            p *= (1 - qj) / (1 + qj)
            qj *= q
            j += 1
            # sum_{i>=j} 2 atanh(q^i) <= 2 q^j / ((1-q)(1-q^2))
            bound = qj * bound_factor
            if bound < tol:
                return SeriesResult(p, bound, j - 1)
            if j > MAX_TERMS:
                raise PrecisionBudgetError(f"psi product at q={mpmath.nstr(q, 12)} exceeds {MAX_TERMS} factors")


def log_psi(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """log psi(q) from the imaginary transformation of the theta null.

    With q = exp(-a): psi(q) = 2 sqrt(pi/a) sum_{n>=0} exp(-pi^2 (n+1/2)^2 / a);
    all terms are positive and the first one dominates as q -> 1.
    """
    q = _check_q(q, ctx, allow_zero=False)
    tol = ctx.tail_tolerance
    with ctx.workdps(15):
        q = mpf(q)
        a = -mp.log(q)
        c = mp.pi**2 / a
        s = mpf(1)
        n = 1
        while True:
            # exp(-c ((n+1/2)^2 - 1/4)) = exp(-c n (n+1))
            t = mp.exp(-c * n * (n + 1))
            s += t
            n += 1
            if t < tol and mp.exp(-2 * c * n) < mpf(1) / 2:
                break
        return mp.log(2) + mp.log(mp.pi / a) / 2 - c / 4 + mp.log(s)


def psi_eval(q, via: str = "series", ctx: PrecisionContext = DEFAULT_CONTEXT) -> PsiValue:
    q = _check_q(q, ctx)
    if q > 0:
        _check_budget(q, ctx)
    if via == "series":
        r = psi_series(q, ctx)
        return PsiValue(q, r.value, via, r.tail_bound)
    if via == "product":
        r = psi_product(q, ctx)
        with ctx.workdps(10):
            return PsiValue(q, r.value, via, r.value * r.tail_bound)
    if via == "modular":
        if q == 0:
            return PsiValue(q, mpf(1), via)
        with ctx.workdps(10):
            return PsiValue(q, mp.exp(log_psi(q, ctx)), via)
    raise ValueError(f"unknown route {via!r}; expected one of {ROUTES}")


def chi_s(q, s: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SeriesResult:
    """chi_s(q) = sum_{j>=0} (-1)^j q^((j^2 + 4 j s)/2), via powers of sqrt(q)."""
    q = _check_q(q, ctx)
    if s < 1:
        raise ValueError("s must be a positive integer")
    if q == 0:
        return SeriesResult(mpf(1), mpf(0), 1)
    with ctx.workdps(10):
        r = mp.sqrt(q)
        # ratio of consecutive terms is r^(2j + 1 + 4s)
        start = max(0, math.ceil((math.log(2) / -math.log(float(r)) - 1 - 4 * s) / 2))

        def term(j):
            t = r ** (j * j + 4 * j * s)
            return -t if j % 2 else t

        return sum_ratio_bounded_series(term, start, ctx)


def lambda_s(q, s: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """lambda_s(q) = sum_{j>=2s} (-1)^j q^(j^2/2) = q^(2 s^2) chi_s(q)."""
    q = _check_q(q, ctx)
    chi = chi_s(q, s, ctx).value
    with ctx.workdps(10):
        return q ** (2 * s * s) * chi


def zeta_k(q, k: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """zeta_k(q) = q^(2k+1) (1-q) / ((2k+1)(1 - q^(2k+1)))."""
    q = _check_q(q, ctx)
    with ctx.workdps(10):
        m = 2 * k + 1
        if q == 0:
            return mpf(0)
        # (1-q)/(1-q^m) = 1/(1 + q + ... + q^(m-1)) avoids cancellation near 1
        return q**m / (m * partial_geometric(q, m - 1))


def partial_geometric(q, l: int) -> mpf:
    """S_l(q) = 1 + q + ... + q^l (S_l = 0 for l < 0)."""
    if l < 0:
        return mpf(0)
    if q == 1:
        return mpf(l + 1)
    return (1 - q ** (l + 1)) / (1 - q) if q < mpf(1) / 2 else mpmath.fsum(q**i for i in range(l + 1))


def h_series(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SeriesResult:
    """h(q) = 2 sum q^(k+1)/(2k+1)^2 summed term by term (slow as q -> 1)."""
    q = _check_q(q, ctx)
    if q == 0:
        return SeriesResult(mpf(0), mpf(0), 0)
    with ctx.workdps(10):
        q = mpf(q)
        # consecutive terms shrink by at least q
        return sum_ratio_bounded_series(lambda k: 2 * q ** (k + 1) / (2 * k + 1) ** 2, 0, ctx, ratio=q)


def h_closed(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """h(q) = sqrt(q) (Li2(sqrt q) - Li2(-sqrt q)), usable up to q = 1."""
    q = to_mpf(q, ctx)
    if q == 0:
        return mpf(0)
    with ctx.workdps(15):
        r = mp.sqrt(q)
        if q == 1:
            return mp.pi**2 / 4
        return r * (mp.polylog(2, r) - mp.polylog(2, -r))


def h1(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """h1 = 2 sum q^(k+1)/((2k+1)(2k+2)) in closed form."""
    q = _check_q(q, ctx)
    with ctx.workdps(10):
        r = mp.sqrt(q)
        out = (1 + r) * mp.log(1 + r)
        if r < 1 and r > 0:
            out += (1 - r) * mp.log(1 - r)
        return out


def h2_series(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SeriesResult:
    """h2 = 2 sum q^(k+1)/((2k+1)^2 (2k+2)) term by term."""
    q = _check_q(q, ctx)
    if q == 0:
        return SeriesResult(mpf(0), mpf(0), 0)
    with ctx.workdps(10):
        q = mpf(q)
        return sum_ratio_bounded_series(
            lambda k: 2 * q ** (k + 1) / ((2 * k + 1) ** 2 * (2 * k + 2)), 0, ctx, ratio=q
        )


def h_eval(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """h(q): term-by-term below q = 0.9, dilogarithm form above."""
    q = _check_q(q, ctx)
    if q <= mpf("0.9"):
        return h_series(q, ctx).value
    return h_closed(q, ctx)


def tau(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """tau(q) = (q - 1) log psi(q)."""
    q = _check_q(q, ctx)
    if q == 0:
        return mpf(0)
    _check_budget(q, ctx)
    with ctx.workdps(10):
        return (q - 1) * log_psi(q, ctx)


def K_estimate(q, ctx: PrecisionContext = DEFAULT_CONTEXT, tau_value=None) -> mpf:
    """(pi^2/4 + (1/2)(1-q) log(1-q) - tau(q)) / (1-q)."""
    q = _check_q(q, ctx, allow_zero=False)
    t = tau(q, ctx) if tau_value is None else tau_value
    with ctx.workdps(10):
        e = 1 - q
        return (mp.pi**2 / 4 + e * mp.log(e) / 2 - t) / e


@dataclass(frozen=True)
class TauBundle:
    q: mpf
    tau: mpf
    h: mpf
    h1: mpf
    h2: mpf
    K_est: mpf


def tau_bundle(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> TauBundle:
    q = _check_q(q, ctx)
    if q == 0:
        z = mpf(0)
        return TauBundle(q, z, z, z, z, mpf("nan"))
    t = tau(q, ctx)
    h = h_eval(q, ctx)
    one = h1(q, ctx)
    with ctx.workdps(10):
        return TauBundle(q, t, h, one, h - one, K_estimate(q, ctx, t))


def zeta_sum(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SeriesResult:
    """2 sum_k zeta_k(q), stopped once q^(2k+1) drops below the tail tolerance."""
    q = _check_q(q, ctx)
    tol = ctx.tail_tolerance
    with ctx.workdps(10):
        total = mpf(0)
        k = 0
        while True:
            m = 2 * k + 1
            if q**m < tol:
                # zeta_j <= q^(2j+1) since (1-q)/(1-q^m) <= 1: geometric tail from j = k on
                return SeriesResult(2 * total, 2 * q**m / (1 - q * q), k)
            total += zeta_k(q, k, ctx)
            k += 1
            if k > MAX_TERMS:
                raise PrecisionBudgetError("zeta series exceeds the term budget")
