"""Spectral values q~_j with double zeros y_j, and the companion roots r~_s.

r~_s solves theta(q, -q^(-2s+1/2)) = 0, equivalently
psi(sqrt q) = lambda_s(q); the solver works with the logarithmic form

    F_s(q) = log psi(sqrt q) - 2 s^2 log q - log chi_s(q),

which is free of cancellation for every s. q~_j is the root of
g(q) = theta(q, t_j(q)) where t_j(q) is the local minimum tracked in its
power-of-q bracket; by the envelope theorem g'(q) = d theta/dq at t_j.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import mpmath
import numpy as np
from mpmath import mp, mpf

from .numerics import (
    DEFAULT_CONTEXT,
    PrecisionBudgetError,
    PrecisionContext,
    SameSignError,
    brent,
    to_mpf,
)
from .psi import chi_s, lambda_s, log_psi, psi_eval
from .theta import MissingSignChange, locate_critical, newton_bracket, theta_jet

log = logging.getLogger(__name__)

SCAN_STEP = 1e-3


class BracketFailure(ArithmeticError):
    """g(q) does not change sign on the bracket expected to hold q~_j."""


def _fine_tol(ctx: PrecisionContext) -> mpf:
    """Step size below which a root is polished to the working noise floor."""
    return mpf(10) ** (-(ctx.working_digits - 8))


# ---------------------------------------------------------------------------
# r~_s


def _F_float(q: np.ndarray, s: int) -> np.ndarray:
    """F_s on a float grid, for sign scans only."""
    r = np.sqrt(q)
    a = -np.log(r)
    c = math.pi**2 / a
    n = np.arange(1, 40)[:, None]
    log_psi_r = math.log(2) + 0.5 * np.log(math.pi / a) - c / 4 + np.log1p(
        np.exp(-c * n * (n + 1)).sum(axis=0)
    )
    jmax = int(math.sqrt(2 * 60 / -math.log(q.max()))) + 8
    j = np.arange(jmax)[:, None]
    expo = (j * j + 4 * j * s) / 2.0 * np.log(q)[None, :]
    chi = (np.where(j % 2, -1.0, 1.0) * np.exp(expo)).sum(axis=0)
    return log_psi_r - 2 * s * s * np.log(q) - np.log(chi)


def rtilde_function(s: int, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """q -> F_s(q) at working precision (positive left of r~_s, negative right)."""

    def F(q):
        q = to_mpf(q, ctx)
        with ctx.workdps(10):
            return log_psi(mp.sqrt(q), ctx) - 2 * s * s * mp.log(q) - mp.log(chi_s(q, s, ctx).value)

    return F


def scan_rtilde(s: int, step: float = SCAN_STEP) -> List[Tuple[float, float]]:
    """Grid cells of (0, 1) where F_s changes sign."""
    grid = np.arange(step, 1.0 - step / 2, step)
    vals = _F_float(grid, s)
    sign = np.sign(vals)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    return [(float(grid[i]), float(grid[i + 1])) for i in idx]


@dataclass(frozen=True)
class RTildeRecord:
    s: int
    r_tilde: mpf
    z: mpf
    u_s: mpf
    v_s: mpf
    residual: mpf  # |psi(sqrt r) - lambda_s(r)|
    theta_residual: mpf  # |theta(r, u_s)| from the series kernel
    candidates: Tuple[mpf, ...] = ()
    flag: str = ""


def r_tilde(s: int, ctx: PrecisionContext = DEFAULT_CONTEXT, step: float = SCAN_STEP) -> RTildeRecord:
    """Solve psi(sqrt q) = lambda_s(q) on (0, 1).

    When the coarse scan finds several crossings all are refined, the
    largest is returned and the record is flagged ``"multiple"``.
    """
    if s < 1:
        raise ValueError("s must be a positive integer")
    cells = scan_rtilde(s, step)
    if not cells:
        raise SameSignError(f"no crossing of psi(sqrt q) and lambda_{s}(q) found on the scan grid")
    F = rtilde_function(s, ctx)
    roots = [brent(F, lo, hi, ctx, xtol=_fine_tol(ctx))[0] for lo, hi in cells]
    flag = ""
    if len(roots) > 1:
        flag = "multiple"
        log.warning("r~_%d: %d crossings on the scan grid, keeping the largest", s, len(roots))
    r = max(roots)
    with ctx.workdps(10):
        u = -r ** (-2 * s + mpf(1) / 2)
        v = -r ** (-2 * s - mpf(1) / 2)
        residual = abs(psi_eval(mp.sqrt(r), "series", ctx).psi - lambda_s(r, s, ctx))
    theta_res = abs(theta_jet(r, u, ctx).value)
    return RTildeRecord(s, r, u, u, v, residual, theta_res, tuple(roots), flag)


def r_tilde_direct(s: int, lo, hi, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """Root of q -> theta(q, -q^(-2s+1/2)) by the series kernel alone."""

    def f(q):
        q = to_mpf(q, ctx)
        with ctx.workdps(10):
            x = -q ** (-2 * s + mpf(1) / 2)
        return theta_jet(q, x, ctx).value

    return brent(f, lo, hi, ctx, xtol=_fine_tol(ctx))[0]


# ---------------------------------------------------------------------------
# q~_j


@dataclass(frozen=True)
class SpectralRecord:
    j: int
    q_tilde: mpf
    y: mpf
    t_j: mpf
    theta_residual: mpf
    dtheta_residual: mpf
    dxx: mpf
    bracket: Tuple[mpf, mpf]
    flag: str = ""


class _MinimumTracker:
    """g(q) = theta(q, t_j(q)) with t_j warm-started from the last solve."""

    def __init__(self, j: int, ctx: PrecisionContext):
        self.j = j
        self.ctx = ctx
        self.t = None
        self.jet = None

    def __call__(self, q):
        t, jet = locate_critical(q, self.j, "minimum", self.ctx, x0=self.t)
        self.t, self.jet = t, jet
        return jet.value, jet.dq

    def g(self, q) -> Optional[mpf]:
        try:
            return self(q)[0]
        except MissingSignChange:
            return None


def _repair_bracket(tracker: _MinimumTracker, lo, hi, max_halvings: int = 200):
    """Shrink ``[lo, hi]`` until g < 0 at the left end and g > 0 at the right.

    Near small j the minimum t_j merges with w_j before q reaches r~_{j+1};
    there g is undefined and the right end is pulled back towards ``lo``.
    Returns ``(lo, hi, repaired)``.
    """
    g_lo = tracker.g(lo)
    if g_lo is None or g_lo >= 0:
        raise BracketFailure(f"g(q) is not negative at the left end q={mpmath.nstr(lo, 15)}")
    right, repaired = hi, False
    cand = hi
    for _ in range(max_halvings):
        g_c = tracker.g(cand)
        if g_c is not None and g_c > 0:
            return lo, cand, repaired
        repaired = True
        if g_c is None:
            right = cand
        else:
            lo = cand
        cand = (lo + right) / 2
    raise BracketFailure(f"no sign change of g on [{mpmath.nstr(lo, 15)}, {mpmath.nstr(hi, 15)}]")


def spectral_value(
    j: int,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    r_lo: Optional[RTildeRecord] = None,
    r_hi: Optional[RTildeRecord] = None,
) -> SpectralRecord:
    """q~_j and the double zero y_j, bracketed by [r~_j, r~_{j+1}]."""
    if j < 1:
        raise ValueError("j must be a positive integer")
    tracker = _MinimumTracker(j, ctx)
    flag = ""
    try:
        r_lo = r_lo or r_tilde(j, ctx)
        r_hi = r_hi or r_tilde(j + 1, ctx)
        bracket = (r_lo.r_tilde, r_hi.r_tilde)
        lo, hi, repaired = _repair_bracket(tracker, *bracket)
        if repaired:
            flag = "bracket-repaired"
    except (BracketFailure, SameSignError):
        if j != 1:
            raise
        bracket = (mpf("0.2"), mpf("0.4"))
        lo, hi, _ = _repair_bracket(tracker, *bracket)
        flag = "fallback-bracket"
    q, val, _ = newton_bracket(tracker, lo, hi, ctx, xtol=_fine_tol(ctx))
    tracker(q)  # leave the tracker at the solution
    y = tracker.t
    jet = tracker.jet
    return SpectralRecord(
        j=j,
        q_tilde=q,
        y=y,
        t_j=y,
        theta_residual=abs(jet.value),
        dtheta_residual=abs(jet.dx),
        dxx=jet.dxx,
        bracket=bracket,
        flag=flag,
    )


def spectral_value_newton(j: int, q0, x0, ctx: PrecisionContext = DEFAULT_CONTEXT, maxiter: int = 60):
    """Solve theta = d theta/dx = 0 by two-dimensional Newton from ``(q0, x0)``.

    Independent of the r~ brackets; used to cross-check the ordering chain.
    Returns ``(q, x)``.
    """
    q, x = to_mpf(q0, ctx), to_mpf(x0, ctx)
    tol = _fine_tol(ctx)
    with ctx.workdps(10):
        # iterates drifting towards q = 1 get expensive and are not converging
        q_cap = 1 - (1 - q) / 10
        for _ in range(maxiter):
            jet = theta_jet(q, x, ctx)
            det = jet.dq * jet.dxx - jet.dx * jet.dqx
            if det == 0:
                break
            dq = (jet.value * jet.dxx - jet.dx * jet.dx) / det
            dx = (jet.dq * jet.dx - jet.dqx * jet.value) / det
            # damp steps that would leave (0, 1)
            lam = mpf(1)
            while not 0 < q - lam * dq < 1:
                lam /= 2
            q -= lam * dq
            x -= lam * dx
            if q > q_cap:
                break
            if abs(dq) < tol and abs(dx) < tol * max(1, abs(x)):
                return q, x
    raise PrecisionBudgetError(f"2-D Newton for q~_{j} did not converge from ({q0}, {x0})")


def asymptotic_seed(j: int, b: float = 2.5) -> Tuple[float, float]:
    """Rough (q~_j, y_j) from the leading asymptotic terms."""
    q = 1 - math.pi / (2 * j) + math.log(j) / (8 * j * j) + b / (j * j)
    return q, -(q ** (-2 * j + 0.5))


# ---------------------------------------------------------------------------
# checks


@dataclass
class OrderingReport:
    j_max: int
    r: Dict[int, mpf] = field(default_factory=dict)
    q: Dict[int, mpf] = field(default_factory=dict)
    holds: Dict[int, bool] = field(default_factory=dict)
    threshold: Optional[int] = None
    increasing: bool = True


def scan_spectral(j: int, q_start, ctx: PrecisionContext = DEFAULT_CONTEXT, steps: int = 40) -> mpf:
    """q~_j located by marching g(q) upward from ``q_start`` (no r~ brackets).

    ``q_start`` must lie below q~_j with t_j present, e.g. q~_(j-1).
    """
    tracker = _MinimumTracker(j, ctx)
    lo = to_mpf(q_start, ctx)
    with ctx.workdps(10):
        step = (1 - lo) / steps
    for _ in range(steps):
        with ctx.workdps(10):
            q = lo + step
        g = tracker.g(q)
        if g is None or g > 0:
            tracker.t = None
            lo, hi, _ = _repair_bracket(tracker, lo, q)
            return newton_bracket(tracker, lo, hi, ctx, xtol=_fine_tol(ctx))[0]
        lo = q
    raise BracketFailure(f"g stays negative on [{mpmath.nstr(q_start, 12)}, 1) for j={j}")


def verify_ordering(
    j_max: int,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    rtildes: Optional[Dict[int, RTildeRecord]] = None,
) -> OrderingReport:
    """Check r~_j <= q~_j <= r~_(j+1) for j = 1..j_max.

    q~_j is recomputed by :func:`scan_spectral` starting from q~_(j-1) (and
    from the fixed bracket (0.2, 0.4) for j = 1), so the check does not
    inherit the r~ bracketing of :func:`spectral_value`.
    """
    rtildes = dict(rtildes or {})
    for s in range(1, j_max + 2):
        if s not in rtildes:
            rtildes[s] = r_tilde(s, ctx)
    rep = OrderingReport(j_max)
    prev = None
    for j in range(1, j_max + 1):
        if j == 1:
            tracker = _MinimumTracker(1, ctx)
            lo, hi, _ = _repair_bracket(tracker, mpf("0.2"), mpf("0.4"))
            q = newton_bracket(tracker, lo, hi, ctx, xtol=_fine_tol(ctx))[0]
        else:
            q = scan_spectral(j, prev, ctx)
        rep.q[j] = q
        rep.r[j] = rtildes[j].r_tilde
        rep.holds[j] = rtildes[j].r_tilde <= q <= rtildes[j + 1].r_tilde
        if prev is not None and not q > prev:
            rep.increasing = False
        prev = q
    rep.r[j_max + 1] = rtildes[j_max + 1].r_tilde
    threshold = None
    for j in range(j_max, 0, -1):
        if rep.holds[j]:
            threshold = j
        else:
            break
    rep.threshold = threshold
    return rep


@dataclass(frozen=True)
class PropositionReport:
    j: int
    theta_at_v: mpf  # theta(q~_j, v_j), expected > 1/3
    xi: mpf  # Xi_j from its definition
    xi_closed: mpf  # sqrt(q)/(1 + sqrt(q))
    theta_at_w: mpf  # theta(q~_j, y_j / q~_j), expected 1
    w_located: Optional[mpf]  # local maximum w_j found by search
    w_expected: mpf  # y_j / q~_j
    bound_value: mpf  # theta(q~_j, -q~_j^(-2j)), expected in (0, q~_j^(2j))

    @property
    def above_third(self) -> bool:
        return self.theta_at_v > mpf(1) / 3


def xi_closed(q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    with ctx.workdps(10):
        r = mp.sqrt(to_mpf(q, ctx))
        return r / (1 + r)


def proposition_checks(
    j: int, ctx: PrecisionContext = DEFAULT_CONTEXT, record: Optional[SpectralRecord] = None
) -> PropositionReport:
    rec = record or spectral_value(j, ctx)
    q = rec.q_tilde
    with ctx.workdps(10):
        v = -q ** (-2 * j - mpf(1) / 2)
        a = -q ** (-2 * j)
        xi = (a - v) / (a + q ** (-2 * j - 1))
        w_expected = rec.y / q
    try:
        w_loc, _ = locate_critical(q, j, "maximum", ctx, x0=w_expected)
    except MissingSignChange:
        w_loc = None
    return PropositionReport(
        j=j,
        theta_at_v=theta_jet(q, v, ctx).value,
        xi=xi,
        xi_closed=xi_closed(q, ctx),
        theta_at_w=theta_jet(q, w_expected, ctx).value,
        w_located=w_loc,
        w_expected=w_expected,
        bound_value=theta_jet(q, a, ctx).value,
    )
