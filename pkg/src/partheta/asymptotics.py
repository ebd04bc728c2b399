"""Asymptotic models for q~_j, y_j, r~_s, z_s and extraction of their constants.

Leading behavior:

    q~_j = 1 - pi/2j + (log j)/8j^2 + b/j^2 + o(1/j^2)
    y_j  = -e^pi exp(-(log j)/4j + alpha/j + o(1/j)),   alpha = -pi/4 - 2b + pi^2/4

and the same shapes for r~_s, z_s with b*, alpha*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from mpmath import mp, mpf

from .numerics import DEFAULT_CONTEXT, PrecisionContext, to_mpf

KINDS = ("qtilde", "y", "rtilde", "z")

#: constant carried by each kind and the b-type constant it derives from
CONSTANT_OF = {"qtilde": "b", "y": "alpha", "rtilde": "b_star", "z": "alpha_star"}
_BASE_OF = {"alpha": "b", "alpha_star": "b_star"}
_ALIASES = {"b*": "b_star", "α": "alpha", "α*": "alpha_star", "alpha*": "alpha_star"}

#: published enclosures of the constants
PUBLISHED_INTERVALS = {
    "b": ("1.735469700", "3.327099360"),
    "b_star": ("1.735469700", "1.756303033"),
    "alpha": ("-4.972195782", "-1.788936462"),
    "alpha_star": ("-1.830603128", "-1.788936462"),
}

DEFAULT_SLACK = "0.1"


class MissingConstantError(ValueError):
    """The model lacks the constant its formula needs."""


class DegenerateSequenceError(ArithmeticError):
    """Per-index estimates do not settle, so no constant can be extracted."""


def alpha_from_b(b, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """alpha = -pi/4 - 2b + pi^2/4 (also maps b* to alpha*)."""
    b = to_mpf(b, ctx)
    with ctx.workdps(10):
        return -mp.pi / 4 - 2 * b + mp.pi**2 / 4


def _norm(name: str) -> str:
    return _ALIASES.get(name, name)


@dataclass(frozen=True)
class AsymptoticModel:
    kind: str
    constants: Dict[str, mpf] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        consts = {_norm(k): to_mpf(v) for k, v in self.constants.items()}
        for name in consts:
            if name not in PUBLISHED_INTERVALS:
                raise ValueError(f"unknown constant {name!r}")
        for alpha, base in _BASE_OF.items():
            if alpha in consts and base in consts:
                if abs(consts[alpha] - alpha_from_b(consts[base])) > mpf(10) ** (-DEFAULT_CONTEXT.working_digits + 5):
                    raise ValueError(f"{alpha} inconsistent with {base}")
        object.__setattr__(self, "constants", consts)

    def constant(self) -> mpf:
        name = CONSTANT_OF[self.kind]
        if name in self.constants:
            return self.constants[name]
        base = _BASE_OF.get(name)
        if base in self.constants:
            return alpha_from_b(self.constants[base])
        raise MissingConstantError(f"{self.kind} model needs {name}")


def model_eval(model: AsymptoticModel, index: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """Value of the expansion at ``index`` with the o-terms dropped."""
    if index < 1:
        raise ValueError("index must be a positive integer")
    c = model.constant()
    with ctx.workdps(10):
        j = mpf(index)
        if model.kind in ("qtilde", "rtilde"):
            return 1 - mp.pi / (2 * j) + mp.log(j) / (8 * j * j) + c / (j * j)
        return -mp.exp(mp.pi) * mp.exp(-mp.log(j) / (4 * j) + c / j)


def per_index_estimate(kind: str, index: int, value, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """Invert the expansion at one index, attributing the whole remainder to the constant."""
    v = to_mpf(value, ctx)
    with ctx.workdps(10):
        j = mpf(index)
        if kind in ("qtilde", "rtilde"):
            return (v - 1 + mp.pi / (2 * j) - mp.log(j) / (8 * j * j)) * j * j
        if kind in ("y", "z"):
            return (mp.log(-v / mp.exp(mp.pi)) + mp.log(j) / (4 * j)) * j
    raise ValueError(f"kind must be one of {KINDS}")


@dataclass(frozen=True)
class ReparamDiagnostics:
    s: int
    h_s: mpf  # s (1 - q)
    d_s: mpf  # h_s - pi/2
    g_s: mpf  # d_s + (log s)/8s; s*g_s should approach -b*

    @classmethod
    def from_value(cls, s: int, q, ctx: PrecisionContext = DEFAULT_CONTEXT) -> "ReparamDiagnostics":
        q = to_mpf(q, ctx)
        with ctx.workdps(10):
            h = s * (1 - q)
            d = h - mp.pi / 2
            return cls(s, h, d, d + mp.log(s) / (8 * s))


@dataclass
class FitResult:
    constant_name: str
    per_index_estimates: List[Tuple[int, mpf]]
    extrapolated: mpf
    paper_interval: Tuple[mpf, mpf]
    in_interval: bool
    diagnostics: List[ReparamDiagnostics] = field(default_factory=list)
    tail_mean: mpf = mpf(0)
    richardson_slope: mpf = mpf(0)
    slack: mpf = mpf(DEFAULT_SLACK)

    @property
    def tail_spread(self) -> mpf:
        tail = _tail([c for _, c in self.per_index_estimates])
        return max(tail) - min(tail)


def _tail(values: Sequence) -> list:
    k = max(2, math.ceil(len(values) / 4))
    return list(values[-k:])


def _monotone(values: Sequence) -> bool:
    diffs = [b - a for a, b in zip(values, values[1:])]
    return all(d >= 0 for d in diffs) or all(d <= 0 for d in diffs)


def extract_constant(
    seq: Sequence[Tuple[int, object]],
    kind: str,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    slack=DEFAULT_SLACK,
    min_entries: int = 10,
    min_index: int = 20,
) -> FitResult:
    """Estimate the constant of ``kind`` from ``(index, value)`` pairs.

    The last quartile of per-index estimates is averaged and corrected by
    one Richardson step in 1/j, with the slope taken from the quartile's end
    points. Exact on data generated by :func:`model_eval`.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    pairs = sorted((int(j), v) for j, v in seq)
    if len(pairs) < min_entries:
        raise ValueError(f"need at least {min_entries} entries, got {len(pairs)}")
    if pairs[0][0] < min_index:
        raise ValueError(f"indices must be >= {min_index}")
    if len({j for j, _ in pairs}) != len(pairs):
        raise ValueError("duplicate indices")
    est = [(j, per_index_estimate(kind, j, v, ctx)) for j, v in pairs]
    values = [c for _, c in est]
    if not all(mp.isfinite(c) for c in values):
        raise DegenerateSequenceError("non-finite per-index estimate")

    tail = est[-len(_tail(values)):]
    tv = [c for _, c in tail]
    half = len(tv) // 2
    early, late = tv[: len(tv) - half], tv[len(tv) - half:]
    noise = mpf(10) ** (-(ctx.working_digits // 2))
    if not _monotone(tv) and max(late) - min(late) > 10 * (max(early) - min(early)) + noise:
        raise DegenerateSequenceError("per-index estimates diverge in the tail")

    with ctx.workdps(10):
        (ja, ca), (jb, cb) = tail[0], tail[-1]
        slope = (ca - cb) / (mpf(1) / ja - mpf(1) / jb)
        mean = sum(tv) / len(tv)
        inv = sum(mpf(1) / j for j, _ in tail) / len(tail)
        value = mean - slope * inv

    name = CONSTANT_OF[kind]
    lo, hi = (to_mpf(x, ctx) for x in PUBLISHED_INTERVALS[name])
    slack = to_mpf(slack, ctx)
    diags = []
    if kind in ("qtilde", "rtilde"):
        diags = [ReparamDiagnostics.from_value(j, v, ctx) for j, v in pairs]
    return FitResult(
        constant_name=name,
        per_index_estimates=est,
        extrapolated=value,
        paper_interval=(lo, hi),
        in_interval=bool(lo - slack <= value <= hi + slack),
        diagnostics=diags,
        tail_mean=mean,
        richardson_slope=slope,
        slack=slack,
    )


def synthetic_sequence(kind: str, constant, indices, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """``(j, model_eval)`` pairs for a planted constant; used for round-trip checks."""
    model = AsymptoticModel(kind, {CONSTANT_OF[kind]: constant})
    return [(j, model_eval(model, j, ctx)) for j in indices]
