"""Sign-certified zero isolation for ball-evaluable functions.

Zeros are located by a sign scan at a fixed step followed by bisection.
A returned bracket always has ball-certified opposite signs at its ends.
"Minimal" and "maximal" are certified only up to the scan resolution: two
zeros closer together than the scan step can be missed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from flint import arb, arb_series

from .ball import Number, ball, sign
from .dynamics import trace_eval
from .errors import InvalidInput, NotFound, Undecidable

Func = Callable[[arb], arb]

DEFAULT_REL_WIDTH = 2.0 ** -40


@dataclass(frozen=True)
class ZeroBracket:
    lo: arb
    hi: arb
    side: str                   # "min" or "max"
    resolution: float           # scan step used to certify minimality/maximality
    sign_lo: int
    sign_hi: int

    @property
    def ball(self) -> arb:
        return self.lo.union(self.hi)

    @property
    def width(self) -> float:
        return float((self.hi - self.lo).upper())


def _point(x: arb) -> arb:
    return x.mid()


def _bisect(f: Func, a: arb, b: arb, sa: int, width: arb) -> tuple[arb, arb, int, int]:
    sb = -sa
    while (b - a) > width:
        m = _point((a + b) / 2)
        sm = sign(f(m))
        if sm is None:
            # midpoint too close to the zero; try off-center probes
            for frac in (3, 5):
                m = _point(a + (b - a) * frac / 8)
                sm = sign(f(m))
                if sm is not None:
                    break
        if sm is None or not (a < m < b):
            # undecidable sign, or the working precision cannot split further
            break
        if sm == sa:
            a = m
        else:
            b, sb = m, sm
    return a, b, sa, sb


def find_zero(f: Func, lo: Number, hi: Number, scan_step: float, side: str = "min",
              rel_width: float = DEFAULT_REL_WIDTH, width: Optional[float] = None) -> ZeroBracket:
    """Bracket the leftmost (``side="min"``) or rightmost zero in ``[lo, hi]``.

    The scan walks from the chosen end in steps of at most ``scan_step``
    and bisects the first certified sign change down to ``width`` (default
    ``rel_width * (hi - lo)``).  Nodes where the sign is undecidable are
    skipped; a bracket is only formed between nodes of certified sign.
    """
    if side not in ("min", "max"):
        raise InvalidInput("side must be 'min' or 'max'")
    if scan_step <= 0:
        raise InvalidInput("scan_step must be positive")
    lo_b, hi_b = _point(ball(lo)), _point(ball(hi))
    if not hi_b > lo_b:
        raise InvalidInput("empty interval")
    span = hi_b - lo_b
    n = max(1, math.ceil(float(span.upper()) / scan_step))
    step = span / n
    target = ball(width) if width is not None else span * rel_width
    order = range(n + 1) if side == "min" else range(n, -1, -1)
    last_x, last_s = None, None
    undecided = False
    for i in order:
        x = _point(lo_b + step * i)
        s = sign(f(x))
        if s is None:
            undecided = True
            continue
        if last_s is not None and s != last_s:
            a, b, sa = (last_x, x, last_s) if side == "min" else (x, last_x, s)
            a, b, sa, sb = _bisect(f, a, b, sa, target)
            if (b - a) > target * 16:
                raise Undecidable("bisection stalled above the target width")
            return ZeroBracket(a, b, side, float(step.mid()), sa, sb)
        last_x, last_s = x, s
    if undecided:
        raise Undecidable("no certified sign change; some scan nodes were undecidable")
    raise NotFound("no sign change found in the interval")


def min_zero(f: Func, lo: Number, hi: Number, scan_step: float, **kw) -> arb:
    """Enclosure of the smallest zero of ``f`` in ``[lo, hi]``."""
    return find_zero(f, lo, hi, scan_step, "min", **kw).ball


def max_zero(f: Func, lo: Number, hi: Number, scan_step: float, **kw) -> arb:
    """Enclosure of the largest zero of ``f`` in ``[lo, hi]``."""
    return find_zero(f, lo, hi, scan_step, "max", **kw).ball


@dataclass
class GapReport:
    accepted: bool
    delta: float
    x_upper: Optional[arb] = None      # min zero of phi in [0, pi]
    x_lower: Optional[arb] = None      # max zero of psi in (0, x_upper)
    gap_error: Optional[float] = None  # upper bound of |(x* - x_*) - pi/16|
    gap_error_lower: Optional[float] = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        # fails only when the enclosed error certainly exceeds 2 delta
        return (self.accepted and self.gap_error_lower is not None
                and self.gap_error_lower <= 2 * self.delta)


def zero_gap_check(phi: Func, psi: Func, delta: Number, check_points: int = 4097) -> GapReport:
    """Check ``|(x* - x_*) - pi/16| <= 2 delta`` for near-cosine inputs.

    ``phi`` should be within ``delta`` of ``2cos x`` and ``psi`` within
    ``delta`` of ``2cos 8x`` on ``[0, pi]`` (grid-checked first), with
    ``delta < 0.01``.
    """
    d = ball(delta)
    if not (d >= 0 and d < ball("0.01")):
        return GapReport(False, float(d.mid()), reason="delta must lie in [0, 0.01)")
    delta = float(d.upper())
    pi = arb.pi()
    for i in range(check_points):
        x = pi * i / (check_points - 1)
        if abs(phi(x) - 2 * x.cos()) > d or abs(psi(x) - 2 * (8 * x).cos()) > d:
            return GapReport(False, delta, reason=f"closeness hypothesis fails near x={float(x.mid()):.6g}")
    x_up = find_zero(phi, 0, pi, float(pi.mid()) / 64, "min")
    x_lo = find_zero(psi, 0, x_up.lo, float(pi.mid()) / 512, "max")
    err = abs((x_up.ball - x_lo.ball) - pi / 16)
    return GapReport(True, delta, x_up.ball, x_lo.ball, float(err.upper()), float(err.lower()))


def trace_germ_constant(lam: Number) -> arb:
    """``(1 + 2 lam^2) sqrt((1 + lam^2)(2 + lam^2))``."""
    l2 = ball(lam) ** 2
    return (1 + 2 * l2) * ((1 + l2) * (2 + l2)).sqrt()


@dataclass
class SigmaSample:
    zeros: list[tuple[int, arb]] = field(default_factory=list)
    unresolved: list[tuple[int, arb]] = field(default_factory=list)


SIGMA_CAP = 24


def sigma_sample(n_max: int, lam: Number, lo: Number, hi: Number,
                 rel_width: float = DEFAULT_REL_WIDTH, cap: int = SIGMA_CAP,
                 scan_step: Optional[float] = None) -> SigmaSample:
    """Certified zeros of ``h_1 .. h_{n_max}`` in ``[lo, hi]``.

    Cells of width ``scan_step`` (default ``pi/(2^n rho)/8``) are refined
    by subdivision.  A cell whose ball value excludes 0 holds no zero; a
    cell on which the derivative ball excludes 0 holds exactly one zero
    when its end signs differ and none otherwise.  Cells that stay
    ambiguous at the target width (tangential or clustered zeros) are
    reported as unresolved instead of failing the run.
    """
    if n_max < 1:
        raise InvalidInput("n_max must be >= 1")
    if n_max > cap:
        raise InvalidInput(f"n_max {n_max} exceeds the cap {cap}")
    lo_b, hi_b = _point(ball(lo)), _point(ball(hi))
    if not hi_b > lo_b:
        raise InvalidInput("empty interval")
    out = SigmaSample()
    rho = trace_germ_constant(lam)
    min_w = (hi_b - lo_b) * rel_width
    for n in range(1, n_max + 1):
        def f(x, n=n):
            return trace_eval(n, lam, x)

        def value_and_slope(a, b, n=n):
            s = trace_eval(n, lam, arb_series([a.union(b), 1], 2))
            return s.coeffs()[0], s.coeffs()[1] if len(s.coeffs()) > 1 else arb(0)

        step = scan_step or float((arb.pi() / (2 ** n * rho) / 8).mid())
        cells = max(1, math.ceil(float((hi_b - lo_b).mid()) / step))
        w = (hi_b - lo_b) / cells
        edges = [_point(lo_b + w * i) for i in range(cells + 1)]
        signs = [sign(f(e)) for e in edges]
        stack = [(edges[i], edges[i + 1], signs[i], signs[i + 1]) for i in range(cells)][::-1]
        while stack:
            a, b, sa, sb = stack.pop()
            val, slope = value_and_slope(a, b)
            if not val.contains(0):
                continue
            known = sa is not None and sb is not None
            if known and not slope.contains(0):
                # monotone on the cell: one zero iff the end signs differ
                if sa != sb:
                    lo_z, hi_z, _, _ = _bisect(f, a, b, sa, min_w)
                    out.zeros.append((n, lo_z.union(hi_z)))
                continue
            if (b - a) <= min_w:
                if known and sa != sb:
                    out.zeros.append((n, a.union(b)))
                else:
                    out.unresolved.append((n, a.union(b)))
                continue
            m = _point((a + b) / 2)
            sm = sign(f(m))
            stack.append((m, b, sm, sb))
            stack.append((a, m, sa, sm))
    return out
