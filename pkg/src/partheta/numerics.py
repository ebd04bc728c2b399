"""Precision policy, constants, certified series summation and root bracketing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import mpmath
from mpmath import mp, mpf

Real = Union[mpf, float, int, str]

#: Hard cap on the number of series terms for a single evaluation.
MAX_TERMS = 10**7


class PrecisionBudgetError(ArithmeticError):
    """A series did not reach its tail tolerance within the term budget."""


class SameSignError(ValueError):
    """The bracket handed to a root search does not straddle a sign change."""


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision and tolerance policy.

    ``working_digits`` is the number of decimal digits carried beyond any
    cancellation; ``tail_tolerance`` is the absolute bound demanded of every
    truncated series; ``root_tolerance`` is the bracket width at which root
    searches stop.
    """

    working_digits: int = 60
    tail_tolerance: mpf = mpf("1e-40")
    root_tolerance: mpf = mpf("1e-30")

    def __post_init__(self):
        tail = mpf(self.tail_tolerance)
        root = mpf(self.root_tolerance)
        object.__setattr__(self, "tail_tolerance", tail)
        object.__setattr__(self, "root_tolerance", root)
        if int(self.working_digits) != self.working_digits or self.working_digits < 30:
            raise ValueError("working_digits must be an integer >= 30")
        if not tail > 0 or tail < mpf(10) ** (-self.working_digits + 5):
            raise ValueError("tail_tolerance below representable noise")
        if root < tail:
            raise ValueError("root_tolerance must be >= tail_tolerance")

    @classmethod
    def with_digits(cls, digits: int) -> "PrecisionContext":
        """Context with default tolerances rescaled to ``digits``.

        Tolerances keep the default proportions: the tail is demanded to
        two thirds of the digits and roots to one half (40 and 30 at 60).
        """
        return cls(digits, mpf(10) ** (-(2 * digits // 3)), mpf(10) ** (-(digits // 2)))

    @property
    def bits(self) -> int:
        return int(math.ceil(self.working_digits * math.log2(10))) + 8

    def workdps(self, extra: int = 0):
        return mp.workdps(self.working_digits + extra)


DEFAULT_CONTEXT = PrecisionContext()


def to_mpf(value, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """Coerce to mpf; mpf inputs pass through unrounded, others at ``ctx`` precision."""
    if isinstance(value, mpf):
        return value
    with ctx.workdps(10):
        return mpf(value)


@dataclass(frozen=True)
class SeriesResult:
    value: mpf
    tail_bound: mpf
    terms_used: int

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class MathConstants:
    pi: mpf
    e_pi: mpf
    D: mpf


def math_constants(ctx: PrecisionContext = DEFAULT_CONTEXT) -> MathConstants:
    """pi, e**pi and D = 1/2 + log 2 + pi**2/8 at the context precision."""
    with ctx.workdps():
        pi = +mp.pi
        return MathConstants(pi=pi, e_pi=mp.exp(pi), D=mpf(1) / 2 + mp.log(2) + pi**2 / 8)


def sum_ratio_bounded_series(
    term: Callable[[int], mpf],
    ratio_threshold_index: Union[int, Callable[[], int]],
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    max_terms: int = MAX_TERMS,
    ratio: Real = None,
) -> SeriesResult:
    """Sum ``term(0) + term(1) + ...`` with a geometric tail certificate.

    The caller guarantees ``|term(n+1)| <= ratio |term(n)|`` for every
    ``n >= ratio_threshold_index`` (``ratio`` defaults to 1/2). Summation
    stops at the first such ``n`` with ``|term(n)| / (1 - ratio)`` below
    ``tail_tolerance``; that quantity is the tail bound (``2 |term(n)|`` for
    the default ratio).
    """
    start = ratio_threshold_index() if callable(ratio_threshold_index) else ratio_threshold_index
    tol = ctx.tail_tolerance
    with ctx.workdps(10):
        rho = mpf(1) / 2 if ratio is None else mpf(ratio)
        if not 0 <= rho < 1:
            raise ValueError("ratio must lie in [0, 1)")
        factor = 1 / (1 - rho)
        total = mpf(0)
        n = 0
        while n <= max_terms:
            t = term(n)
            if n >= start:
                bound = factor * abs(t)
                if bound < tol:
                    return SeriesResult(+total, bound, n)
            total += t
            n += 1
    raise PrecisionBudgetError(
        f"series not converged after {max_terms} terms; raise precision or move away from q=1"
    )


def bracket_root(
    f: Callable[[mpf], mpf],
    lo: Real,
    hi: Real,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    xtol: Real = None,
    maxiter: int = 2000,
) -> mpf:
    """Root of ``f`` inside ``[lo, hi]`` by Brent's method.

    Every iterate stays inside the current sign-change bracket, so the
    result is guaranteed to lie in ``[lo, hi]``. Iteration stops once the
    bracket is narrower than ``xtol`` (default ``ctx.root_tolerance``).
    """
    return brent(f, lo, hi, ctx, xtol, maxiter)[0]


def brent(f, lo, hi, ctx=DEFAULT_CONTEXT, xtol=None, maxiter=2000):
    """Brent's method returning ``(root, (left, right))``; see :func:`bracket_root`."""
    with ctx.workdps(10):
        a, b = mpf(lo), mpf(hi)
        if not a < b:
            raise ValueError(f"empty bracket [{lo}, {hi}]")
        tol = mpf(ctx.root_tolerance if xtol is None else xtol)
        fa, fb = f(a), f(b)
        if fa == 0:
            return a, (a, a)
        if fb == 0:
            return b, (b, b)
        if mpmath.sign(fa) == mpmath.sign(fb):
            raise SameSignError(
                f"f has the same sign at both ends of [{mpmath.nstr(a, 12)}, {mpmath.nstr(b, 12)}]"
            )
        c, fc = a, fa
        d = e = b - a
        for _ in range(maxiter):
            if mpmath.sign(fb) == mpmath.sign(fc):
                c, fc = a, fa
                d = e = b - a
            if abs(fc) < abs(fb):
                a, b, c = b, c, b
                fa, fb, fc = fb, fc, fb
            m = (c - b) / 2
            eps = tol / 2
            if abs(m) <= eps or fb == 0:
                return b, (min(b, c), max(b, c))
            if abs(e) >= eps and abs(fa) > abs(fb):
                s = fb / fa
                if a == c:
                    p = 2 * m * s
                    qq = 1 - s
                else:
                    qq = fa / fc
                    r = fb / fc
                    p = s * (2 * m * qq * (qq - r) - (b - a) * (r - 1))
                    qq = (qq - 1) * (r - 1) * (s - 1)
                if p > 0:
                    qq = -qq
                else:
                    p = -p
                if 2 * p < min(3 * m * qq - abs(eps * qq), abs(e * qq)):
                    e, d = d, p / qq
                else:
                    d = e = m
            else:
                d = e = m
            a, fa = b, fb
            b = b + d if abs(d) > eps else b + (eps if m > 0 else -eps)
            fb = f(b)
        raise PrecisionBudgetError(f"root search did not converge in {maxiter} steps")
