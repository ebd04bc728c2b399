"""The partial theta function theta(q, x) = sum_j q**(j(j+1)/2) x**j.

Evaluation runs through a fixed-point kernel whose precision is raised by
the size of the largest term, so the absolute accuracy requested by the
context survives the heavy cancellation for x << -1 and q near 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import mpmath
from mpmath import mp, mpf
from mpmath.libmp import from_man_exp, to_fixed

from . import kernel
from .numerics import (
    DEFAULT_CONTEXT,
    MAX_TERMS,
    PrecisionBudgetError,
    PrecisionContext,
    SameSignError,
    SeriesResult,
    to_mpf,
)

log = logging.getLogger(__name__)

_LN2 = math.log(2.0)


class MissingSignChange(SameSignError):
    """No sign change where a real zero or critical point was expected."""


def _check_q(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    q = to_mpf(q, ctx)
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    return q


@dataclass(frozen=True)
class ThetaQuery:
    q: mpf
    x: mpf

    def __post_init__(self):
        object.__setattr__(self, "q", _check_q(self.q))
        object.__setattr__(self, "x", to_mpf(self.x))


@dataclass(frozen=True)
class ThetaJet:
    """theta and its low-order partial derivatives at one point.

    Each ``*_tail`` is the certified truncation bound of the matching value.
    """

    q: mpf
    x: mpf
    value: mpf
    dx: mpf
    dxx: mpf
    dq: mpf
    dqx: mpf
    value_tail: mpf
    dx_tail: mpf
    dxx_tail: mpf
    dq_tail: mpf
    terms_used: int
    prec: int


def _exact(man) -> mpf:
    return mp.make_mpf(from_man_exp(int(man), 0))


def _plan(q: float, x: float, ctx: PrecisionContext) -> Tuple[int, int]:
    """Fixed-point precision and a term-count estimate for theta(q, x)."""
    lq = math.log(q)
    ax = abs(x)
    lx = math.log(ax)
    peak = max(0.0, -lx / lq - 0.5)
    log_max = max(0.0, peak * (peak + 1) / 2 * lq + peak * lx)
    # first n with log|t_n| below the target: n(n+1)/2 lq + n lx = -(log_max + 140)
    a, b, c = lq / 2, lq / 2 + lx, log_max + ctx.working_digits * 2.31 + 50
    n_est = (-b - math.sqrt(b * b - 4 * a * c)) / (2 * a)
    small_x = 3 * max(0.0, -lx / _LN2)
    guard = log_max / _LN2 + 3 * math.log2(n_est + 4) + small_x + max(0.0, -lq / _LN2) + 24
    return ctx.bits + int(guard), int(n_est)


def theta_jet(q, x, ctx: PrecisionContext = DEFAULT_CONTEXT) -> ThetaJet:
    """theta, d/dx, d2/dx2, d/dq and d2/dqdx at ``(q, x)`` from one kernel pass."""
    q = _check_q(q, ctx)
    x = to_mpf(x, ctx)
    tol = ctx.tail_tolerance
    if x == 0:
        zero = mpf(0)
        return ThetaJet(q, x, mpf(1), q, 2 * q**3, zero, mpf(1), zero, zero, zero, zero, 1, mp.prec)
    prec, _ = _plan(float(q), float(x), ctx)
    scale = min(mpf(1), abs(x)) ** 2 * q / 8
    with mp.workprec(prec + 16):
        tol_fixed = max(1, int(mpmath.ldexp(tol * scale, prec)))
    try:
        s0, s1, s2, s3, n, t_next = kernel.theta_moments(
            to_fixed(q._mpf_, prec), to_fixed(x._mpf_, prec), prec, tol_fixed, MAX_TERMS
        )
    except OverflowError:
        raise PrecisionBudgetError(
            f"theta({mpmath.nstr(q, 8)}, {mpmath.nstr(x, 8)}) needs more than {MAX_TERMS} terms"
        ) from None
    with mp.workprec(prec + 16):
        unit = mpmath.ldexp(1, -prec)
        s0, s1, s2, s3 = (_exact(s) * unit for s in (s0, s1, s2, s3))
        t = _exact(t_next) * unit
        ax = abs(x)
        return ThetaJet(
            q=q,
            x=x,
            value=s0,
            dx=s1 / x,
            dxx=(s2 - s1) / x**2,
            dq=(s2 + s1) / (2 * q),
            dqx=(s3 + s2) / (2 * q * x),
            value_tail=2 * t,
            dx_tail=2 * n * t / ax,
            dxx_tail=2 * n * (n + 1) * t / ax**2,
            dq_tail=n * (n + 1) * t / q,
            terms_used=n,
            prec=prec,
        )


def theta_eval(query: ThetaQuery, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SeriesResult:
    jet = theta_jet(query.q, query.x, ctx)
    return SeriesResult(jet.value, jet.value_tail, jet.terms_used)


def theta_dx(query: ThetaQuery, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SeriesResult:
    jet = theta_jet(query.q, query.x, ctx)
    return SeriesResult(jet.dx, jet.dx_tail, jet.terms_used)


def theta_dxx(query: ThetaQuery, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SeriesResult:
    jet = theta_jet(query.q, query.x, ctx)
    return SeriesResult(jet.dxx, jet.dxx_tail, jet.terms_used)


def theta(q, x, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """Shorthand for ``theta_eval(ThetaQuery(q, x), ctx).value``."""
    return theta_jet(q, x, ctx).value


def functional_equation_residual(query: ThetaQuery, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """``|theta(q, x) - 1 - q x theta(q, q x)|``."""
    q, x = query.q, query.x
    if x == 0:
        return mpf(0)
    lhs = theta_jet(q, x, ctx)
    with mp.workprec(lhs.prec + 16):
        qx = q * x
    rhs = theta_jet(q, qx, ctx)
    with mp.workprec(max(lhs.prec, rhs.prec) + 16):
        return abs(lhs.value - 1 - qx * rhs.value)


def newton_bracket(fdf, lo, hi, ctx: PrecisionContext = DEFAULT_CONTEXT, x0=None, xtol=None, maxiter=400):
    """Root of ``f`` in ``[lo, hi]`` by Newton steps guarded by bisection.

    ``fdf(x)`` returns ``(f(x), f'(x))``. A Newton step is taken only when it
    lands inside the current sign-change bracket and at least halves the
    previous step; otherwise the bracket is bisected. Returns
    ``(root, value_at_root, (left, right))``.
    """
    with ctx.workdps(10):
        a, b = to_mpf(lo, ctx), to_mpf(hi, ctx)
        fa, _ = fdf(a)
        fb, _ = fdf(b)
        if fa == 0:
            return a, fa, (a, a)
        if fb == 0:
            return b, fb, (b, b)
        if mpmath.sign(fa) == mpmath.sign(fb):
            raise MissingSignChange(
                f"no sign change on [{mpmath.nstr(a, 15)}, {mpmath.nstr(b, 15)}]"
            )
        if fa > 0:
            a, b = b, a  # keep f(a) < 0 < f(b)
        tol = mpf(ctx.root_tolerance if xtol is None else xtol)
        x = (a + b) / 2 if x0 is None else to_mpf(x0, ctx)
        if not min(a, b) < x < max(a, b):
            x = (a + b) / 2
        step_old = abs(b - a)
        step = step_old
        fx, dfx = fdf(x)
        for _ in range(maxiter):
            if fx == 0:
                return x, fx, (x, x)
            if fx < 0:
                a = x
            else:
                b = x
            newton_ok = dfx != 0
            if newton_ok:
                xn = x - fx / dfx
                newton_ok = min(a, b) < xn < max(a, b) and abs(xn - x) * 2 <= step_old
            step_old = step
            if newton_ok:
                step = abs(xn - x)
                x = xn
            else:
                x = (a + b) / 2
                step = abs(b - a) / 2
            fx, dfx = fdf(x)
            if step < tol / 4 or abs(b - a) < tol:
                # polish: Newton steps near the bracket while |f| keeps dropping
                left, right = min(a, b), max(a, b)
                for _ in range(3):
                    if fx == 0 or dfx == 0:
                        break
                    xn = x - fx / dfx
                    if not left - tol <= xn <= right + tol:
                        break
                    fn, dfn = fdf(xn)
                    if abs(fn) >= abs(fx):
                        break
                    x, fx, dfx = xn, fn, dfn
                return x, fx, (left, right)
        raise PrecisionBudgetError("guarded Newton iteration did not converge")


@dataclass(frozen=True)
class CriticalPointRecord:
    index: int
    kind: str  # "minimum" (t_s) or "maximum" (w_s)
    location: Optional[mpf]
    theta_value: Optional[mpf]
    bracket: Tuple[mpf, mpf]
    status: str = "ok"  # "ok" or "missing"


def critical_bracket(q, s: int, kind: str) -> Tuple[mpf, mpf]:
    """Power-of-q bracket for t_s (minimum) or w_s (maximum)."""
    if kind == "minimum":
        return -q ** (-2 * s), -q ** (-2 * s + 1)
    return -q ** (-2 * s - 1), -q ** (-2 * s)


def locate_critical(q, s: int, kind: str, ctx: PrecisionContext = DEFAULT_CONTEXT, x0=None):
    """Locate t_s or w_s; returns ``(location, jet)`` or raises MissingSignChange."""
    q = _check_q(q, ctx)
    with ctx.workdps(10):
        lo, hi = critical_bracket(q, s, kind)

    def fdf(x):
        jet = theta_jet(q, x, ctx)
        return jet.dx, jet.dxx

    root, _, _ = newton_bracket(fdf, lo, hi, ctx, x0=x0)
    return root, theta_jet(q, root, ctx)


def critical_points(q, s_max: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> List[CriticalPointRecord]:
    """t_1, w_1, t_2, w_2, ... up to index ``s_max``.

    Indices whose power-of-q bracket shows no sign change of d theta/dx are
    returned with ``status="missing"`` rather than raising.
    """
    q = _check_q(q, ctx)
    out = []
    for s in range(1, s_max + 1):
        for kind in ("minimum", "maximum"):
            with ctx.workdps(10):
                bracket = critical_bracket(q, s, kind)
            try:
                loc, jet = locate_critical(q, s, kind, ctx)
            except MissingSignChange:
                log.info("critical point %s_%d missing at q=%s", "t" if kind == "minimum" else "w", s, q)
                out.append(CriticalPointRecord(s, kind, None, None, bracket, "missing"))
                continue
            if (jet.dxx > 0) != (kind == "minimum"):
                raise ArithmeticError(f"second derivative has the wrong sign at {kind} {s}")
            out.append(CriticalPointRecord(s, kind, loc, jet.value, bracket))
    return out


@dataclass(frozen=True)
class ZeroRecord:
    index: int
    location: Optional[mpf]
    bracket: Tuple[mpf, mpf]
    residual: Optional[mpf]
    status: str = "simple"  # "simple", "coalesced" or "complex"


def real_zeros(q, count: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> List[ZeroRecord]:
    """The zeros xi_1 > xi_2 > ... > xi_count of theta(q, .).

    Zeros are bracketed by the critical points (xi_{2s} in (w_s, t_s),
    xi_{2s-1} in (t_s, w_{s-1}) with w_0 = 0). Indices follow continuity in
    q: a pair whose minimum t_s has theta > 0 has left the real axis and is
    reported with ``status="complex"``; one with |theta(t_s)| below the noise
    floor is reported ``"coalesced"`` at t_s.
    """
    q = _check_q(q, ctx)
    smax = (count + 1) // 2
    crit = {(c.index, c.kind): c for c in critical_points(q, smax, ctx)}
    noise = 10 * ctx.tail_tolerance
    out: List[ZeroRecord] = []
    for s in range(1, smax + 1):
        t = crit[(s, "minimum")]
        w_right = crit.get((s - 1, "maximum"))
        w_left = crit[(s, "maximum")]
        right = mpf(0) if s == 1 else w_right.location
        left = w_left.location
        pair = [2 * s - 1, 2 * s]
        if t.status != "ok" or left is None or right is None:
            for k in pair:
                out.append(ZeroRecord(k, None, t.bracket, None, "complex"))
            continue
        if abs(t.theta_value) < noise:
            for k in pair:
                out.append(ZeroRecord(k, t.location, (left, right), abs(t.theta_value), "coalesced"))
            continue
        if t.theta_value > 0:
            for k in pair:
                out.append(ZeroRecord(k, None, (left, right), None, "complex"))
            continue
        for k, (lo, hi) in zip(pair, [(t.location, right), (left, t.location)]):
            def fdf(x):
                jet = theta_jet(q, x, ctx)
                return jet.value, jet.dx

            root, val, _ = newton_bracket(fdf, lo, hi, ctx)
            out.append(ZeroRecord(k, root, (lo, hi), abs(val)))
    return out[:count]


def theta_product_eval(q, x, zeros: Sequence[ZeroRecord], ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """Truncated zero product prod_j (1 - x / xi_j) over the given zeros."""
    _check_q(q, ctx)
    with ctx.workdps(10):
        x = to_mpf(x, ctx)
        p = mpf(1)
        for z in zeros:
            if z.location is not None:
                p *= 1 - x / z.location
        return +p
