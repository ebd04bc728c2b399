"""Grid checks for the invariants of every module, reported row by row.

Each row carries the number of grid points, the worst margin (positive
means satisfied with room to spare) and a pass flag. Margins are in the
natural units of the check: an absolute slack for tolerances, a relative
gap for inequalities.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import mpmath
from mpmath import mp, mpf

from . import asymptotics, psi, spectral, theta
from .numerics import DEFAULT_CONTEXT, PrecisionContext, math_constants, to_mpf

SUITES = ("theta", "psi", "spectral", "asymptotics")


@dataclass
class Row:
    suite: str
    name: str
    grid_size: int
    worst_margin: mpf
    passed: bool
    detail: str = ""

    def as_dict(self, digits: int = 12) -> dict:
        return {
            "suite": self.suite,
            "name": self.name,
            "grid_size": self.grid_size,
            "worst_margin": mpmath.nstr(self.worst_margin, digits),
            "pass": self.passed,
            "detail": self.detail,
        }


def _row(suite, name, margins, detail="", strict=False) -> Row:
    margins = list(margins)
    worst = min(margins) if margins else mpf(0)
    ok = bool(margins) and (worst > 0 if strict else worst >= 0)
    return Row(suite, name, len(margins), worst, ok, detail)


def _grid(n: int, lo: float, hi: float) -> List[mpf]:
    return [mpf(lo) + (mpf(hi) - mpf(lo)) * (i + 1) / (n + 1) for i in range(n)]


def _threshold(flags: Dict[int, bool]) -> Optional[int]:
    """Smallest j from which every recorded flag up to the largest j is true."""
    out = None
    for j in sorted(flags, reverse=True):
        if not flags[j]:
            break
        out = j
    return out


# ---------------------------------------------------------------------------
# theta


def theta_positivity(ctx) -> Row:
    margins = []
    for q in _grid(9, 0, 1):
        for x in (0, mpf("0.5"), 1, 5, 50, 1000):
            margins.append(theta.theta_jet(q, x, ctx).value)
    return _row("theta", "positivity for x >= 0", margins, strict=True)


def theta_functional_equation(ctx, points: int = 100, seed: int = 7) -> Row:
    rng = random.Random(seed)
    tol = 3 * ctx.tail_tolerance
    margins = []
    for _ in range(points):
        q = to_mpf(rng.uniform(0.01, 0.99), ctx)
        x = to_mpf(rng.uniform(-50, 50), ctx)
        margins.append(tol - theta.functional_equation_residual(theta.ThetaQuery(q, x), ctx))
    return _row("theta", "functional equation residual <= 3 tail_tol", margins)


def theta_interlacing(ctx, qs=("0.1", "0.2", "0.3"), pairs: int = 4) -> List[Row]:
    """w_s < xi_2s < t_s < xi_(2s-1) < w_(s-1), then u_s, v_s between the zeros.

    The first chain holds whenever the zeros are real. The placement of
    u_s, v_s is only claimed for small q or large s (at s = 1 it breaks
    exactly at q = r~_1, where u_1 becomes a zero), so that row reports
    the first index from which it holds at each q.
    """
    chain_m, marker_m, firsts = [], [], []
    for qstr in qs:
        q = to_mpf(qstr, ctx)
        zeros = [z.location for z in theta.real_zeros(q, 2 * pairs + 1, ctx)]
        crit = theta.critical_points(q, pairs, ctx)
        t = {c.index: c.location for c in crit if c.kind == "minimum"}
        w = {c.index: c.location for c in crit if c.kind == "maximum"}
        w[0] = mpf(0)
        per_s = {}
        with ctx.workdps(10):
            for s in range(1, pairs + 1):
                xi_odd, xi_even, xi_next = zeros[2 * s - 2], zeros[2 * s - 1], zeros[2 * s]
                chain = [w[s], xi_even, t[s], xi_odd, w[s - 1]]
                chain_m += [b - a for a, b in zip(chain, chain[1:])]
                u = -q ** (-2 * s + mpf(1) / 2)
                v = -q ** (-2 * s - mpf(1) / 2)
                per_s[s] = [u - xi_even, xi_odd - u, v - xi_next, xi_even - v]
        first = _threshold({s: min(m) > 0 for s, m in per_s.items()})
        firsts.append(f"q={qstr}: s>={first}")
        for s in range(first or pairs + 1, pairs + 1):
            marker_m += per_s[s]
        if first is None:
            marker_m.append(min(min(m) for m in per_s.values()))
    return [
        _row("theta", "zeros interlace with critical points", chain_m, strict=True),
        _row("theta", "u_s, v_s separate the zeros from the recorded index", marker_m, strict=True,
             detail="; ".join(firsts)),
    ]


def theta_bound_property(ctx, qs=None, s_max: int = 20) -> Row:
    """0 < theta(q, -q^-s) < q^s; the gap is about q^(2s+1), so precision follows it."""
    qs = qs or [mpf(i) / 20 for i in range(1, 20)]
    margins = []
    for q0 in qs:
        for s in range(1, s_max + 1):
            lq = abs(math.log10(float(q0)))
            digits = ctx.working_digits + int((2 * s + 1) * lq) + int(s * s * lq / 2) + 20
            sub = PrecisionContext.with_digits(digits)
            with sub.workdps(10):
                q = to_mpf(q0, sub)
                qs_ = q**s
                val = theta.theta_jet(q, -q ** (-s), sub).value
                margins.append(min(val, qs_ - val) / qs_)
    return _row("theta", "theta(q, -q^-s) in (0, q^s)", margins, strict=True)


def theta_critical_recursion(ctx, s_extra: int = 3) -> Row:
    """t_(s+1) <= w_s / q and w_s <= t_s / q for q in (q~_j, q~_(j+1)], s >= j+1."""
    qt = [mpf(0)] + [spectral.spectral_value(j, ctx).q_tilde for j in (1, 2, 3)]
    margins = []
    for j in range(3):
        for frac in ("0.3", "0.7", "1"):
            with ctx.workdps(10):
                q = qt[j] + (qt[j + 1] - qt[j]) * mpf(frac)
            for s in range(j + 1, j + 1 + s_extra):
                ts, _ = theta.locate_critical(q, s, "minimum", ctx)
                ts1, _ = theta.locate_critical(q, s + 1, "minimum", ctx)
                ws, _ = theta.locate_critical(q, s, "maximum", ctx)
                # equality w_j = t_j / q holds at q = q~_j, up to the location tolerance
                with ctx.workdps(10):
                    slack = ctx.root_tolerance * abs(ts) / q
                    margins += [ws / q - ts1 + slack, ts / q - ws + slack]
    return _row("theta", "t_(s+1) <= w_s/q and w_s <= t_s/q", margins)


def theta_derivative_consistency(ctx, tol="1e-12") -> Row:
    tol = mpf(tol)
    margins = []
    for q, x in [("0.3", "-2"), ("0.5", "-1"), ("0.7", "-5"), ("0.9", "3"), ("0.2", "-11")]:
        q, x = to_mpf(q, ctx), to_mpf(x, ctx)
        h = mpf("1e-10")
        jet = theta.theta_jet(q, x, ctx)
        with ctx.workdps(10):
            fd = (theta.theta(q, x + h, ctx) - theta.theta(q, x - h, ctx)) / (2 * h)
            fd2 = (theta.theta_jet(q, x + h, ctx).dx - theta.theta_jet(q, x - h, ctx).dx) / (2 * h)
            margins.append(tol - abs(fd - jet.dx) / max(abs(jet.dx), 1))
            margins.append(tol - abs(fd2 - jet.dxx) / max(abs(jet.dxx), 1))
    return _row("theta", "derivatives match finite differences", margins)


def theta_katsnelson(ctx, qs=("0.9", "0.99", "0.999", "0.9999")) -> Row:
    """|theta(q, -20) - 1/21| strictly decreasing as q -> 1."""
    with ctx.workdps(10):
        dev = [abs(theta.theta(to_mpf(q, ctx), -20, ctx) - mpf(1) / 21) for q in qs]
    return _row("theta", "theta(q,-20) -> 1/21 monotonically", [a - b for a, b in zip(dev, dev[1:])], strict=True)


def theta_suite(ctx, j_max: int = 20) -> List[Row]:
    return [
        theta_positivity(ctx),
        theta_functional_equation(ctx),
        *theta_interlacing(ctx),
        theta_bound_property(ctx),
        theta_critical_recursion(ctx),
        theta_derivative_consistency(ctx),
        theta_katsnelson(ctx),
    ]


# ---------------------------------------------------------------------------
# psi


def psi_routes(ctx, n: int = 200) -> Row:
    tol = 10 * ctx.tail_tolerance
    margins = []
    for q in _grid(n, 0.01, 0.99):
        a = psi.psi_eval(q, "series", ctx).psi
        b = psi.psi_eval(q, "product", ctx).psi
        margins.append(tol - abs(a - b))
    return _row("psi", "series and product routes agree to 10 tail_tol", margins)


def psi_shape(ctx, n: int = 200) -> List[Row]:
    grid = _grid(n, 0, 1)
    vals = [psi.psi_eval(q, "series", ctx).psi for q in grid]
    dec = [a - b for a, b in zip(vals, vals[1:])]
    with ctx.workdps(10):
        conv = [vals[i - 1] - 2 * vals[i] + vals[i + 1] for i in range(1, len(vals) - 1)]
    return [
        _row("psi", "psi strictly decreasing", dec, strict=True),
        _row("psi", "psi convex (second differences >= 0)", conv),
    ]


def psi_flatness(ctx, m_max: int = 5) -> Row:
    """log(psi(q)/(1-q)^l) decreasing along q = 1 - 10^-m for l = 1..4."""
    margins = []
    for l in range(1, 5):
        logs = []
        for m in range(1, m_max + 1):
            with ctx.workdps(10):
                e = mpf(10) ** (-m)
                logs.append(psi.log_psi(1 - e, ctx) - l * mp.log(e))
        margins += [a - b for a, b in zip(logs, logs[1:])]
    return _row("psi", "psi(q)/(1-q)^l -> 0 along q = 1 - 10^-m", margins, strict=True)


def psi_tau(ctx, n: int = 200) -> List[Row]:
    grid = _grid(n, 0, 1)
    bundles = [psi.tau_bundle(q, ctx) for q in grid]
    with ctx.workdps(10):
        top = mp.pi**2 / 4
        inc = [b.tau - a.tau for a, b in zip(bundles, bundles[1:])]
        below = [top - b.tau for b in bundles]
        sandwich = []
        gap = []
        split = []
        for b in bundles:
            q = b.q
            lower = psi.h_eval(q * q, ctx) / q
            sandwich += [b.tau - lower, b.h - b.tau]
            gap += [b.h - b.tau, (1 - q) / 12 - (b.h - b.tau)]
            split.append(10 * ctx.tail_tolerance - abs(b.h2 - psi.h2_series(q, ctx).value))
    return [
        _row("psi", "tau strictly increasing", inc, strict=True),
        _row("psi", "tau < pi^2/4", below, strict=True),
        _row("psi", "h(q^2)/q <= tau <= h", sandwich, strict=True),
        _row("psi", "0 <= h - tau <= (1-q)/12", gap),
        _row("psi", "h = h1 + h2 to 10 tail_tol", split),
    ]


def psi_partial_sums(ctx, qs=None, l_max: int = 40) -> List[Row]:
    qs = qs or [mpf(i) / 10 for i in range(1, 10)] + [mpf("0.99")]
    m17, m18 = [], []
    with ctx.workdps(10):
        for q in qs:
            S = [psi.partial_geometric(q, l) for l in range(l_max + 1)]
            for l in range(2, l_max + 1):
                m17.append(((l - 1) * S[l] - (l + 1) * q * S[l - 2]) / S[l])
                for nu in range(1, l // 2 + 1):
                    m18.append(((l - 2 * nu + 1) * S[l] - (l + 1) * q**nu * S[l - 2 * nu]) / S[l])
    return [
        _row("psi", "(l-1) S_l >= (l+1) q S_(l-2)", m17),
        _row("psi", "(l-2nu+1) S_l >= (l+1) q^nu S_(l-2nu)", m18),
    ]


def psi_zeta(ctx, qs=None, k_max: int = 30) -> List[Row]:
    qs = qs or _grid(19, 0, 1)
    margins = []
    with ctx.workdps(10):
        for q in qs:
            for k in range(1, k_max + 1):
                z = psi.zeta_k(q, k, ctx)
                m = mpf(2 * k + 1) ** 2
                scale = q ** (k + 1) / m
                margins += [(z - q ** (2 * k + 1) / m) / scale, (q ** (k + 1) / m - z) / scale]
        ident = []
        for q in (mpf("0.1"), mpf("0.5"), mpf("0.9")):
            zs = psi.zeta_sum(q, ctx)
            ident.append(ctx.tail_tolerance + zs.tail_bound - abs(psi.tau(q, ctx) - zs.value))
    return [
        _row("psi", "q^(2k+1)/(2k+1)^2 <= zeta_k <= q^(k+1)/(2k+1)^2", margins, strict=True),
        _row("psi", "tau = 2 sum zeta_k", ident),
    ]


def psi_lambda_chi(ctx, s_max: int = 4) -> List[Row]:
    bounds, order, limit = [], [], []
    for q in _grid(19, 0, 1):
        chis = [psi.chi_s(q, s, ctx).value for s in range(1, s_max + 2)]
        lams = [psi.lambda_s(q, s, ctx) for s in range(1, s_max + 2)]
        for c in chis:
            bounds += [c - mpf(1) / 2, 1 - c]
        order += [a - b for a, b in zip(lams, lams[1:])]
    for s in range(1, s_max + 1):
        dev_c, dev_l = [], []
        for m in range(1, 6):
            with ctx.workdps(10):
                q = 1 - mpf(10) ** (-m)
                dev_c.append(abs(psi.chi_s(q, s, ctx).value - mpf(1) / 2))
                dev_l.append(abs(psi.lambda_s(q, s, ctx) - mpf(1) / 2))
        limit += [a - b for a, b in zip(dev_c, dev_c[1:])] + [a - b for a, b in zip(dev_l, dev_l[1:])]
    return [
        _row("psi", "1/2 <= chi_s <= 1", bounds),
        _row("psi", "lambda_s >= lambda_(s+1)", order),
        _row("psi", "chi_s, lambda_s -> 1/2 monotonically", limit, strict=True),
    ]


def psi_h_expansion(ctx, m_max: int = 6) -> Row:
    """|h - pi^2/4 - (1/2) e log e + D e| / (e^2 |log e|) bounded and non-increasing."""
    D = math_constants(ctx).D
    cs = []
    for m in range(1, m_max + 1):
        with ctx.workdps(10):
            e = mpf(10) ** (-m)
            r = psi.h_closed(1 - e, ctx) - mp.pi**2 / 4 - e * mp.log(e) / 2 + D * e
            cs.append(abs(r) / (e * e * abs(mp.log(e))))
    return _row("psi", "h expansion residual constant stable", [a - b for a, b in zip(cs, cs[1:])],
                detail=f"C range [{mpmath.nstr(min(cs), 5)}, {mpmath.nstr(max(cs), 5)}]")


def psi_K_interval(ctx) -> Row:
    D = math_constants(ctx).D
    lo, hi = D - mpf("0.01"), D + mpf(1) / 12 + mpf("0.01")
    margins, ks = [], []
    for m in (3, 4):
        with ctx.workdps(10):
            k = psi.K_estimate(1 - mpf(10) ** (-m), ctx)
        ks.append(mpmath.nstr(k, 10))
        margins += [k - lo, hi - k]
    return _row("psi", "K_est in [D - 0.01, D + 1/12 + 0.01]", margins, detail="K_est " + ", ".join(ks))


def psi_suite(ctx, j_max: int = 20) -> List[Row]:
    return (
        [psi_routes(ctx)]
        + psi_shape(ctx)
        + [psi_flatness(ctx)]
        + psi_tau(ctx)
        + psi_partial_sums(ctx)
        + psi_zeta(ctx)
        + psi_lambda_chi(ctx)
        + [psi_h_expansion(ctx), psi_K_interval(ctx)]
    )


# ---------------------------------------------------------------------------
# spectral


def spectral_suite(ctx, j_max: int = 20) -> List[Row]:
    tol = 10 * ctx.tail_tolerance
    rt = {s: spectral.r_tilde(s, ctx) for s in range(1, j_max + 2)}
    recs = {j: spectral.spectral_value(j, ctx, rt[j], rt[j + 1]) for j in range(1, j_max + 1)}
    rows = []

    cert = []
    for r in recs.values():
        cert += [tol - r.theta_residual, tol - r.dtheta_residual, r.dxx]
    rows.append(_row("spectral", "double zero: |theta|, |theta_x| small, theta_xx > 0", cert, strict=True))

    flip = []
    step = mpf("1e-6")
    for j, r in recs.items():
        tr = spectral._MinimumTracker(j, ctx)
        with ctx.workdps(10):
            flip += [-tr(r.q_tilde - step)[0], tr(r.q_tilde + step)[0]]
    rows.append(_row("spectral", "g(q~ - 1e-6) < 0 < g(q~ + 1e-6)", flip, strict=True))

    qs = [recs[j].q_tilde for j in sorted(recs)]
    ys = [recs[j].y for j in sorted(recs)]
    rs = [rt[s].r_tilde for s in sorted(rt)]
    with ctx.workdps(10):
        e_pi = mp.exp(mp.pi)
        mono = [b - a for a, b in zip(qs, qs[1:])] + [b - a for a, b in zip(rs, rs[1:])]
        mono += [a - b for a, b in zip(ys, ys[1:])] + [y + e_pi for y in ys] + [-y for y in ys]
    rows.append(_row("spectral", "q~, r~ increasing; y decreasing in (-e^pi, 0)", mono, strict=True))

    rep = spectral.verify_ordering(j_max, ctx, rt)
    chain = []
    for j in range(rep.threshold or j_max + 1, j_max + 1):
        chain += [rep.q[j] - rep.r[j], rep.r[j + 1] - rep.q[j]]
    rows.append(_row("spectral", "r~_j <= q~_j <= r~_(j+1) from threshold", chain,
                     detail=f"threshold j={rep.threshold}"))

    eq = []
    tol_root = 2 * ctx.root_tolerance
    for s in range(1, min(30, j_max + 1) + 1):
        rec = rt.get(s) or spectral.r_tilde(s, ctx)
        with ctx.workdps(10):
            lo, hi = rec.r_tilde - mpf("1e-4"), min(rec.r_tilde + mpf("1e-4"), 1 - mpf("1e-12"))
        eq.append(tol_root - abs(spectral.r_tilde_direct(s, lo, hi, ctx) - rec.r_tilde))
    rows.append(_row("spectral", "psi/lambda root equals direct theta(q, u_s) root", eq))

    props = {j: spectral.proposition_checks(j, ctx, recs[j]) for j in recs}
    third = {j: p.above_third for j, p in props.items()}
    th = _threshold(third)
    rows.append(_row("spectral", "theta(q~_j, v_j) > 1/3 from threshold",
                     [props[j].theta_at_v - mpf(1) / 3 for j in range(th or j_max + 1, j_max + 1)],
                     detail=f"threshold j={th}", strict=True))
    rows.append(_row("spectral", "theta(q~_j, w_j) = 1", [tol - abs(p.theta_at_w - 1) for p in props.values()]))
    with ctx.workdps(10):
        xi_dev = [abs(p.xi - p.xi_closed) for p in props.values()]
        xi_gap = [abs(p.xi_closed - mpf(1) / 2) for p in props.values()]
    rows.append(_row("spectral", "Xi_j closed form", [mpf("1e-30") - d for d in xi_dev]))
    rows.append(_row("spectral", "|Xi_j - 1/2| decreasing", [a - b for a, b in zip(xi_gap, xi_gap[1:])] or [mpf(1)],
                     strict=True))
    return rows


# ---------------------------------------------------------------------------
# asymptotics


def asymptotics_suite(ctx, j_max: int = 20) -> List[Row]:
    rows = []
    ends = []
    for b, a in (("1.735469700", "-1.788936462"), ("1.756303033", "-1.830603128"),
                 ("3.327099360", "-4.972195782")):
        # endpoints are published truncated to 1e-9; the slope -2 doubles that
        ends.append(mpf("3e-9") - abs(asymptotics.alpha_from_b(b, ctx) - mpf(a)))
    rows.append(_row("asymptotics", "alpha_from_b maps interval endpoints", ends))

    trip = []
    for kind in asymptotics.KINDS:
        for c in ("-1.5", "0", "1.75", "2.0", "3.3"):
            seq = asymptotics.synthetic_sequence(kind, c, range(20, 61), ctx)
            fit = asymptotics.extract_constant(seq, kind, ctx)
            trip.append(mpf("1e-6") - abs(fit.extrapolated - mpf(c)))
    rows.append(_row("asymptotics", "planted constant round trip to 1e-6", trip))

    s_top = max(80, 4 * j_max)
    rt = [(s, spectral.r_tilde(s, ctx).r_tilde) for s in range(20, s_top + 1)]
    spreads = []
    for top in (s_top // 2, s_top):
        sub = [(s, r) for s, r in rt if top // 2 <= s <= top]
        spreads.append(asymptotics.extract_constant(sub, "rtilde", ctx, min_entries=2).tail_spread)
    rows.append(_row("asymptotics", "r~ tail spread shrinks as the range grows",
                     [a - b for a, b in zip(spreads, spreads[1:])], strict=True))

    fit = asymptotics.extract_constant(rt, "rtilde", ctx)
    d = [abs(x.d_s) for x in fit.diagnostics]
    sg = [abs(x.s * x.g_s) for x in fit.diagnostics]
    rows.append(_row("asymptotics", "d_s -> 0 and s g_s bounded",
                     [a - b for a, b in zip(d, d[1:])] + [4 - v for v in sg],
                     detail=f"s*g_s at s={s_top}: {mpmath.nstr(fit.diagnostics[-1].s * fit.diagnostics[-1].g_s, 8)}"))
    return rows


_SUITE_FUNCS: Dict[str, Callable] = {
    "theta": theta_suite,
    "psi": psi_suite,
    "spectral": spectral_suite,
    "asymptotics": asymptotics_suite,
}


def run_suite(name: str, ctx: PrecisionContext = DEFAULT_CONTEXT, j_max: int = 20) -> List[Row]:
    """Rows for one suite, or for every suite when ``name == "all"``."""
    if name == "all":
        return [row for n in SUITES for row in _SUITE_FUNCS[n](ctx, j_max)]
    if name not in _SUITE_FUNCS:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES + ('all',)}")
    return _SUITE_FUNCS[name](ctx, j_max)
