"""Command-line interface: ``partheta <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 numeric-budget or degenerate-sequence error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import mpmath
from mpmath import mpf

from . import asymptotics, psi, spectral, theta, verify
from .numerics import DEFAULT_CONTEXT, PrecisionBudgetError, PrecisionContext, SameSignError

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

SPECTRAL_COLUMNS = ["j", "q_tilde", "y", "theta_residual", "dtheta_residual"]


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    precision_digits: int = DEFAULT_CONTEXT.working_digits
    j_max: int = 20
    grid_spec: str = ""
    output_format: str = "csv"
    output_path: Optional[str] = None
    parallelism: int = 1

    def __post_init__(self):
        if self.output_format not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        if self.parallelism < 1 or self.j_max < 1 or self.precision_digits < 1:
            raise UsageError("precision, j-max and parallelism must be positive")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    def context(self) -> PrecisionContext:
        return make_context(self.precision_digits)


def make_context(digits: int) -> PrecisionContext:
    if digits == DEFAULT_CONTEXT.working_digits:
        return DEFAULT_CONTEXT
    try:
        return PrecisionContext.with_digits(digits)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_range(text: str) -> List[int]:
    """``"7"`` -> [7]; ``"3..6"`` -> [3, 4, 5, 6]."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad index range {text!r}; use N or A..B") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"bad index range {text!r}")
    return list(range(lo, hi + 1))


def parse_grid(text: str, points: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> List[mpf]:
    """``"0.5"`` -> [0.5]; ``"0.1..0.9"`` -> ``points`` evenly spaced values, ends included."""
    try:
        with ctx.workdps(10):
            return _grid(text, points)
    except ValueError:
        raise UsageError(f"bad q grid {text!r}") from None


def _grid(text, points):
    if ".." in text:
        a, b = (mpf(v) for v in text.split("..", 1))
        if points < 2:
            return [a]
        return [a + (b - a) * i / (points - 1) for i in range(points)]
    return [mpf(text)]


def parse_synthetic(text: str) -> Tuple[str, mpf]:
    name, sep, value = text.partition("=")
    if not sep:
        raise UsageError("--synthetic expects NAME=VALUE, e.g. b=2.0")
    try:
        with mpmath.workdps(100):
            return name.strip(), mpf(value)
    except ValueError:
        raise UsageError(f"bad value in --synthetic {text!r}") from None


# ---------------------------------------------------------------------------
# output


def fmt(value, digits: int) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, int, str)):
        return str(value)
    return mpmath.nstr(value, digits, min_fixed=-5, max_fixed=5)


def render(columns: Sequence[str], rows: Iterable[dict], cfg: RunConfig, timestamp: bool,
           comments: Sequence[str] = (), extra: Optional[dict] = None) -> str:
    rows = list(rows)
    d = cfg.precision_digits
    if cfg.output_format == "json":
        doc = {}
        if timestamp:
            doc["generated"] = _now()
        doc["config"] = json.loads(cfg.to_json())
        if extra:
            doc.update({k: fmt(v, d) if isinstance(v, mpf) else v for k, v in extra.items()})
        doc["rows"] = [{c: _json_value(r.get(c), d) for c in columns} for r in rows]
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# generated {_now()}\n")
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c), d) for c in columns])
    return buf.getvalue()


def _json_value(v, digits):
    if isinstance(v, (bool, int)) or v is None:
        return v
    return fmt(v, digits)


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def emit(text: str, cfg: RunConfig) -> None:
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def farm(func: Callable, items: Sequence, parallelism: int) -> list:
    """Map ``func`` over ``items``; results always come back in input order."""
    if parallelism <= 1 or len(items) <= 1:
        return [func(i) for i in items]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(func, items))


# ---------------------------------------------------------------------------
# workers (top level so they pickle)


def _spectral_row(arg):
    j, digits = arg
    ctx = make_context(digits)
    try:
        r = spectral.spectral_value(j, ctx)
    except (spectral.BracketFailure, SameSignError, PrecisionBudgetError) as exc:
        return {"j": j, "error": f"{type(exc).__name__}: {exc}"}
    return {"j": j, "q_tilde": r.q_tilde, "y": r.y, "theta_residual": r.theta_residual,
            "dtheta_residual": r.dtheta_residual}


def _rtilde_row(arg):
    s, digits = arg
    ctx = make_context(digits)
    try:
        r = spectral.r_tilde(s, ctx)
    except (spectral.BracketFailure, SameSignError, PrecisionBudgetError) as exc:
        return {"s": s, "error": f"{type(exc).__name__}: {exc}"}
    return {"s": s, "r_tilde": r.r_tilde, "z": r.z, "residual": r.residual,
            "theta_residual": r.theta_residual, "flag": r.flag}


def _psi_row(arg):
    q, digits = arg
    ctx = make_context(digits)
    with ctx.workdps(10):
        q = mpf(q)
    b = psi.tau_bundle(q, ctx)
    return {"q": q, "psi_series": psi.psi_eval(q, "series", ctx).psi,
            "psi_product": psi.psi_eval(q, "product", ctx).psi,
            "tau": b.tau, "h": b.h, "h1": b.h1, "h2": b.h2, "K_est": b.K_est}


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args, cfg: RunConfig) -> int:
    if args.q is None or args.x is None:
        raise UsageError("eval needs --q and --x")
    ctx = cfg.context()
    try:
        with ctx.workdps(10):
            q, x = mpf(args.q), mpf(args.x)
    except ValueError:
        raise UsageError("bad --q or --x") from None
    if not 0 < q < 1:
        raise UsageError("q must lie in (0, 1)")
    res = theta.theta_eval(theta.ThetaQuery(q, x), ctx)
    row = {"q": q, "x": x, "value": res.value, "tail_bound": res.tail_bound, "terms_used": res.terms_used}
    emit(render(list(row), [row], cfg, args.timestamp), cfg)
    return EXIT_OK


def cmd_zeros(args, cfg: RunConfig) -> int:
    ctx = cfg.context()
    q = _single_q(args, ctx)
    rows = []
    for z in theta.real_zeros(q, args.count, ctx):
        rows.append({"index": z.index, "location": z.location, "bracket_lo": z.bracket[0],
                     "bracket_hi": z.bracket[1], "residual": z.residual, "status": z.status})
    cols = ["index", "location", "bracket_lo", "bracket_hi", "residual", "status"]
    emit(render(cols, rows, cfg, args.timestamp), cfg)
    return EXIT_OK


def cmd_critical(args, cfg: RunConfig) -> int:
    ctx = cfg.context()
    q = _single_q(args, ctx)
    rows = [{"index": c.index, "kind": c.kind, "location": c.location, "theta_value": c.theta_value,
             "status": c.status} for c in theta.critical_points(q, args.s_max, ctx)]
    emit(render(["index", "kind", "location", "theta_value", "status"], rows, cfg, args.timestamp), cfg)
    return EXIT_OK


def cmd_psi_table(args, cfg: RunConfig) -> int:
    ctx = cfg.context()
    grid = parse_grid(args.q or "0.05..0.95", args.points, ctx)
    for q in grid:
        if not 0 < q < 1:
            raise UsageError("grid values must lie in (0, 1)")
    with ctx.workdps(10):
        items = [(mpmath.nstr(q, ctx.working_digits + 10), cfg.precision_digits) for q in grid]
    rows = farm(_psi_row, items, cfg.parallelism)
    cols = ["q", "psi_series", "psi_product", "tau", "h", "h1", "h2", "K_est"]
    emit(render(cols, rows, cfg, args.timestamp), cfg)
    return EXIT_OK


def cmd_rtilde(args, cfg: RunConfig) -> int:
    idx = parse_range(args.s or args.j or "1")
    rows = farm(_rtilde_row, [(s, cfg.precision_digits) for s in idx], cfg.parallelism)
    cols = ["s", "r_tilde", "z", "residual", "theta_residual", "flag"]
    return _table(cols, rows, cfg, args.timestamp)


def cmd_spectral(args, cfg: RunConfig) -> int:
    idx = parse_range(args.j or args.s or "1")
    rows = farm(_spectral_row, [(j, cfg.precision_digits) for j in idx], cfg.parallelism)
    return _table(list(SPECTRAL_COLUMNS), rows, cfg, args.timestamp)


def _table(cols, rows, cfg, timestamp) -> int:
    failed = [r for r in rows if "error" in r]
    if failed:
        cols = cols + ["error"]
    emit(render(cols, rows, cfg, timestamp), cfg)
    if failed and len(failed) == len(rows):
        return EXIT_BUDGET
    return EXIT_OK


_FIT_DEFAULTS = {"qtilde": "50..200", "y": "50..200", "rtilde": "50..400", "z": "50..400"}


def cmd_fit(args, cfg: RunConfig) -> int:
    kind = args.kind
    idx = parse_range(args.j or args.s or _FIT_DEFAULTS[kind])
    ctx = cfg.context()
    if args.synthetic:
        name, value = parse_synthetic(args.synthetic)
        try:
            model = asymptotics.AsymptoticModel(kind, {name: value})
            seq = [(i, asymptotics.model_eval(model, i, ctx)) for i in idx]
        except asymptotics.MissingConstantError as exc:
            raise UsageError(str(exc)) from None
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    elif kind in ("qtilde", "y"):
        rows = farm(_spectral_row, [(j, cfg.precision_digits) for j in idx], cfg.parallelism)
        seq = [(r["j"], r["q_tilde"] if kind == "qtilde" else r["y"]) for r in rows if "error" not in r]
    else:
        rows = farm(_rtilde_row, [(s, cfg.precision_digits) for s in idx], cfg.parallelism)
        seq = [(r["s"], r["r_tilde"] if kind == "rtilde" else r["z"]) for r in rows if "error" not in r]
    try:
        fit = asymptotics.extract_constant(seq, kind, ctx)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    diag = {d.s: d for d in fit.diagnostics}
    out = []
    for i, c in fit.per_index_estimates:
        row = {"index": i, "estimate": c}
        if i in diag:
            row.update(h_s=diag[i].h_s, d_s=diag[i].d_s, g_s=diag[i].g_s)
        out.append(row)
    cols = ["index", "estimate"] + (["h_s", "d_s", "g_s"] if diag else [])
    lo, hi = fit.paper_interval
    d = cfg.precision_digits
    summary = {
        "constant": fit.constant_name,
        "extrapolated": fit.extrapolated,
        "interval_lo": lo,
        "interval_hi": hi,
        "slack": fit.slack,
        "in_interval": fit.in_interval,
        "source": "synthetic" if args.synthetic else "computed",
    }
    comments = [f"{k}={fmt(v, d)}" for k, v in summary.items()]
    emit(render(cols, out, cfg, args.timestamp, comments=comments, extra=summary), cfg)
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    ctx = cfg.context()
    try:
        rows = verify.run_suite(args.suite, ctx, args.j_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cols = ["suite", "name", "grid_size", "worst_margin", "pass", "detail"]
    emit(render(cols, [r.as_dict() for r in rows], cfg, args.timestamp), cfg)
    failed = [r for r in rows if not r.passed]
    for r in failed:
        print(f"FAILED {r.suite}: {r.name} (worst margin {mpmath.nstr(r.worst_margin, 6)})", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


def _single_q(args, ctx: PrecisionContext) -> mpf:
    if args.q is None:
        raise UsageError("--q is required")
    try:
        with ctx.workdps(10):
            q = mpf(args.q)
    except ValueError:
        raise UsageError(f"bad --q {args.q!r}") from None
    if not 0 < q < 1:
        raise UsageError("q must lie in (0, 1)")
    return q


# ---------------------------------------------------------------------------
# parser


def default_digits(environ=None) -> int:
    env = (environ if environ is not None else os.environ).get("THETA_PRECISION")
    if env is None or env == "":
        return DEFAULT_CONTEXT.working_digits
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"THETA_PRECISION must be an integer, got {env!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, help="working digits (default 60 or $THETA_PRECISION)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", metavar="PATH", help="write to PATH instead of stdout")
    common.add_argument("--parallelism", type=int, default=1, metavar="N")
    common.add_argument("--no-timestamp", dest="timestamp", action="store_false",
                        help="omit the generated-at header so output is byte-stable")
    common.add_argument("--q", help="q value, or A..B for a grid where accepted")
    common.add_argument("--x", help="x value")
    common.add_argument("--j", help="index or range A..B")
    common.add_argument("--s", help="index or range A..B")
    common.add_argument("--j-max", type=int, default=20)

    p = argparse.ArgumentParser(prog="partheta", description="Partial theta function toolkit.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="theta(q, x) with its tail bound")
    z = sub.add_parser("zeros", parents=[common], help="real zeros xi_1.. at fixed q")
    z.add_argument("--count", type=int, default=4)
    c = sub.add_parser("critical", parents=[common], help="critical points t_s, w_s at fixed q")
    c.add_argument("--s-max", type=int, default=3)
    t = sub.add_parser("psi-table", parents=[common], help="psi, tau, h, K_est on a q grid")
    t.add_argument("--points", type=int, default=10)
    sub.add_parser("rtilde", parents=[common], help="r~_s and z_s")
    sub.add_parser("spectral", parents=[common], help="q~_j and double zeros y_j")
    f = sub.add_parser("fit", parents=[common], help="extract b, b*, alpha, alpha*")
    f.add_argument("kind", choices=asymptotics.KINDS)
    f.add_argument("--synthetic", metavar="NAME=VALUE", help="fit a planted constant instead of computed data")
    v = sub.add_parser("verify", parents=[common], help="run invariant suites")
    v.add_argument("suite", choices=verify.SUITES + ("all",))
    return p


COMMANDS = {
    "eval": cmd_eval,
    "zeros": cmd_zeros,
    "critical": cmd_critical,
    "psi-table": cmd_psi_table,
    "rtilde": cmd_rtilde,
    "spectral": cmd_spectral,
    "fit": cmd_fit,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        digits = args.precision if args.precision is not None else default_digits()
        cfg = RunConfig(
            precision_digits=digits,
            j_max=args.j_max,
            grid_spec=args.q or "",
            output_format=args.format,
            output_path=args.out,
            parallelism=args.parallelism,
        )
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"partheta: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PrecisionBudgetError, asymptotics.DegenerateSequenceError, OverflowError) as exc:
        print(f"partheta: numeric budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
