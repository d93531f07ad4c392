"""The Thue-Morse dynamic on function pairs and the trace polynomials.

``Phi(x, y) = (y**2 * (x - 2) + 2, x)`` drives every sequence here:
``P_{k+1} = P_{k-1}**2 * (P_k - 2) + 2``.  The trace polynomials ``h_n``
follow the same rule from ``h_1 = x**2 - lam**2 - 2`` and
``h_2 = (x**2 - lam**2)**2 - 4*x**2 + 2``.

Point evaluation always runs the O(n) recurrence.  Expanded coefficients
exist only for small ``n`` (degree ``2**n``) as an exact test oracle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from flint import arb, arb_series, fmpq, fmpq_poly

from .ball import Number, ball
from .errors import CapExceeded, InvalidInput
from .series import LocalSeries, cos_series, series_affine_arg

EXPAND_CAP = 10


def phi(x, y):
    """One application of the dynamic on scalars, series or balls."""
    return (y * y * (x - 2) + 2, x)


def _exact(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, fmpq):
        return Fraction(int(v.p), int(v.q))
    if isinstance(v, (int, float, str)):
        return Fraction(v)
    raise TypeError(f"no exact value for {type(v).__name__}")


def _coerce(lam, x):
    """Bring ``lam`` into the arithmetic of ``x`` (ball or exact rational)."""
    if isinstance(x, (arb, arb_series)):
        return ball(lam), x
    if isinstance(x, fmpq):
        f = _exact(lam)
        return fmpq(f.numerator, f.denominator), x
    if isinstance(x, (Fraction, int)):
        return _exact(lam), Fraction(x)
    return ball(lam), ball(x)


def trace_eval(n: int, lam: Number, x: Number):
    """``h_n(x)`` by the recurrence.

    Works in ball arithmetic for ball/float/str input and exactly for
    ``Fraction``/``fmpq`` input (``lam`` then has to be exact too).
    """
    if n < 1:
        raise InvalidInput("trace index must be >= 1")
    lam, x = _coerce(lam, x)
    x2 = x * x
    h1 = x2 - lam * lam - 2
    if n == 1:
        return h1
    s = x2 - lam * lam
    h2 = s * s - 4 * x2 + 2
    prev, curr = h1, h2
    for _ in range(n - 2):
        curr, prev = phi(curr, prev)
    return curr


def trace_poly_expand(n: int, lam: Number, cap: int = EXPAND_CAP) -> fmpq_poly:
    """Exact rational coefficients of ``h_n`` (degree ``2**n``)."""
    if n < 1:
        raise InvalidInput("trace index must be >= 1")
    if n > cap:
        raise CapExceeded(f"expansion of h_{n} exceeds cap {cap}")
    lam = _exact(lam)
    l2 = fmpq(lam.numerator, lam.denominator) ** 2
    x = fmpq_poly([0, 1])
    h1 = x * x - l2 - 2
    if n == 1:
        return h1
    s = x * x - l2
    prev, curr = h1, s * s - 4 * x * x + 2
    for _ in range(n - 2):
        curr, prev = phi(curr, prev)
    return curr


class EvalMode(str, enum.Enum):
    POINT = "point-recurrence"
    EXPANDED = "expanded-coefficients"


@dataclass(frozen=True)
class TracePair:
    """Trace polynomials for one coupling, in either evaluation mode."""

    lam: Number
    mode: EvalMode = EvalMode.POINT

    def h(self, n: int, x):
        if self.mode is EvalMode.EXPANDED:
            p = trace_poly_expand(n, self.lam)
            if isinstance(x, arb):
                return _horner_ball(p, x)
            f = _exact(x)
            return p(fmpq(f.numerator, f.denominator))
        return trace_eval(n, self.lam, x)


def _horner_ball(p: fmpq_poly, x: arb) -> arb:
    acc = arb(0)
    for c in reversed(p.coeffs()):
        acc = acc * x + arb(c)
    return acc


@dataclass(frozen=True)
class SeriesPair:
    """Local series of ``(P_{k-1}, P_k)`` about a shared center."""

    prev: LocalSeries
    curr: LocalSeries
    index: int = 0

    def __post_init__(self):
        if self.prev.order != self.curr.order:
            raise InvalidInput("pair series must share the order")
        if not self.prev.center.overlaps(self.curr.center):
            raise InvalidInput("pair series must share the center")

    @property
    def center(self) -> arb:
        return self.curr.center

    @property
    def order(self) -> int:
        return self.curr.order


def phi_step(pair: SeriesPair) -> SeriesPair:
    """Advance ``(P_{k-1}, P_k)`` to ``(P_k, P_{k+1})``."""
    curr, prev = phi(pair.curr, pair.prev)
    return SeriesPair(prev, curr, pair.index + 1)


def iterate_pair(pair: SeriesPair, k: int) -> SeriesPair:
    """Return the pair with ``index == k`` (``k >= pair.index``)."""
    if k < pair.index:
        raise InvalidInput("cannot iterate backwards")
    while pair.index < k:
        pair = phi_step(pair)
    return pair


def trace_series(lam: Number, center: Number, order: int, upto: int) -> list[LocalSeries]:
    """Series of ``h_1 .. h_upto`` about ``center`` (index ``n-1``)."""
    c = ball(center)
    lam = ball(lam)
    x = LocalSeries.variable(order, c) + c
    x2 = x * x
    h1 = x2 - (lam * lam + 2)
    s = x2 - lam * lam
    out = [h1, s * s - 4 * x2 + 2]
    while len(out) < upto:
        out.append(phi(out[-1], out[-2])[0])
    return out[:upto]


class PairSource:
    """A base pair ``(P_{-1}, P_0)`` that can be evaluated and expanded.

    Subclasses provide :meth:`point` and :meth:`series`; ``evaluate`` runs
    the dynamic pointwise from the base values.
    """

    def point(self, x: arb) -> tuple[arb, arb]:
        raise NotImplementedError

    def series(self, center: Number, order: int) -> SeriesPair:
        raise NotImplementedError

    def evaluate(self, k: int, x: Number) -> arb:
        if k < -1:
            raise InvalidInput("P_k is defined for k >= -1")
        prev, curr = self.point(ball(x))
        if k == -1:
            return prev
        for _ in range(k):
            curr, prev = phi(curr, prev)
        return curr

    def shifted(self, m: int) -> "PairSource":
        """The source whose base pair is ``(P_{m-1}, P_m)``."""
        return _ShiftedSource(self, m) if m else self


class _ShiftedSource(PairSource):
    def __init__(self, base: PairSource, m: int):
        self.base, self.m = base, m

    def point(self, x):
        return self.base.evaluate(self.m - 1, x), self.base.evaluate(self.m, x)

    def evaluate(self, k, x):
        return self.base.evaluate(k + self.m, x)

    def series(self, center, order):
        p = iterate_pair(self.base.series(center, order), self.m)
        return SeriesPair(p.prev, p.curr, 0)

    def shifted(self, m):
        return self.base.shifted(self.m + m)


class TraceSource(PairSource):
    """``P_k = h_{k + offset}``; ``offset=5`` gives the pair ``(h_4, h_5)``."""

    def __init__(self, lam: Number, offset: int = 5):
        if offset < 2:
            raise InvalidInput("offset must be >= 2 so that P_-1 = h_{offset-1} exists")
        self.lam, self.offset = lam, offset

    def point(self, x):
        return (trace_eval(self.offset - 1, self.lam, x),
                trace_eval(self.offset, self.lam, x))

    def evaluate(self, k, x):
        if k < -1:
            raise InvalidInput("P_k is defined for k >= -1")
        return trace_eval(k + self.offset, self.lam, ball(x))

    def series(self, center, order):
        hs = trace_series(self.lam, center, order, self.offset)
        return SeriesPair(hs[-2], hs[-1], 0)

    def shifted(self, m):
        return TraceSource(self.lam, self.offset + m)

    def __repr__(self):
        return f"TraceSource(lam={self.lam!r}, offset={self.offset})"


class CosineGermSource(PairSource):
    """Pair whose renormalizations are ``2cos x`` plus polynomial deviations.

    ``P_{-1}(y) = Q_{-1}(rho*(y - x0)/2)`` and ``P_0(y) = Q_0(rho*(y - x0))``
    with ``Q_j(x) = 2cos x + sum_n dev_j[n] x^n``.  Empty deviations give
    the exact cosine family, which the dynamic maps to itself.
    """

    def __init__(self, rho: Number, x0: Number = 0,
                 prev_dev: tuple = (), curr_dev: tuple = ()):
        self.rho, self.x0 = rho, x0
        self.prev_dev = tuple(prev_dev)
        self.curr_dev = tuple(curr_dev)

    def _q(self, dev, x):
        out = 2 * x.cos()
        if dev:
            acc = arb(0)
            for c in reversed(dev):
                acc = acc * x + ball(c)
            out += acc
        return out

    def point(self, x):
        t = ball(self.rho) * (ball(x) - ball(self.x0))
        return self._q(self.prev_dev, t / 2), self._q(self.curr_dev, t)

    def _local(self, scale, dev, center, order):
        # Q(scale*(center - x0) + scale*u)
        s = ball(scale)
        phase = s * (ball(center) - ball(self.x0))
        cos_part = series_affine_arg(cos_series(order, phase, center), s)
        if not dev:
            return cos_part
        cs = [ball(c) for c in dev][: order + 1]
        cs += [arb(0)] * (order + 1 - len(cs))
        poly = LocalSeries(ball(center), tuple(cs))
        moved = series_affine_arg(poly, s, phase)
        return cos_part + LocalSeries(ball(center), moved.coeffs)

    def series(self, center, order):
        r = ball(self.rho)
        return SeriesPair(self._local(r / 2, self.prev_dev, center, order),
                          self._local(r, self.curr_dev, center, order), 0)


def renormalized_delta(germ, k: int, x: Number) -> arb:
    """``Delta_k(x) = P_k(x/(2^k rho) + x0) - 2cos x`` by point recurrence.

    ``germ`` needs ``source``, ``base`` and ``rho`` attributes (a
    :class:`~thuemorse.germs.GermCertificate`).
    """
    if k < -1:
        raise InvalidInput("k must be >= -1")
    x = ball(x)
    y = x / (ball(germ.rho) * arb(2) ** k) + germ.base
    return germ.source.evaluate(k, y) - 2 * x.cos()


def delta_rhs(d_prev2: Callable, d_prev1: Callable, x: arb) -> arb:
    """Right-hand side of the deviation recurrence at ``x``.

    ``(2 + 2cos(x/2)) D_{k-1}(x/2)
      + D_{k-2}(x/4) (4cos(x/4) + D_{k-2}(x/4)) (2cos(x/2) - 2 + D_{k-1}(x/2))``
    """
    h, q = x / 2, x / 4
    a, b = d_prev1(h), d_prev2(q)
    ch, cq = h.cos(), q.cos()
    return (2 + 2 * ch) * a + b * (4 * cq + b) * (2 * ch - 2 + a)


def delta_recurrence_residual(germ, k: int, x: Number) -> arb:
    """``|Delta_k(x) - RHS(Delta_{k-1}, Delta_{k-2})(x)|`` as a ball."""
    if k < 1:
        raise InvalidInput("the deviation recurrence needs k >= 1")
    x = ball(x)
    lhs = renormalized_delta(germ, k, x)
    rhs = delta_rhs(lambda t: renormalized_delta(germ, k - 2, t),
                    lambda t: renormalized_delta(germ, k - 1, t), x)
    return abs(lhs - rhs)


def delta_series_step(d_prev: LocalSeries, d_curr: LocalSeries) -> LocalSeries:
    """Series form of the deviation recurrence: ``Delta_{k+1}`` from
    ``Delta_{k-1}`` and ``Delta_k`` (all in the renormalized variable)."""
    n = min(d_prev.order, d_curr.order)
    c = d_curr.center
    half = series_affine_arg(d_curr.truncate(n), arb(1) / 2)
    quarter = series_affine_arg(d_prev.truncate(n), arb(1) / 4)
    cos_h = series_affine_arg(cos_series(n, 0, c), arb(1) / 2)
    cos_q = series_affine_arg(cos_series(n, 0, c), arb(1) / 4)
    return (2 + cos_h) * half + quarter * (2 * cos_q + quarter) * (cos_h - 2 + half)


@dataclass
class GrowthRow:
    n: int
    sup_error: float
    bound: float
    ok: bool


@dataclass
class GrowthReport:
    accepted: bool
    delta: float
    rows: list[GrowthRow]
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.accepted and all(r.ok for r in self.rows)


def _grid(lo: float, hi: float, points: int) -> list[arb]:
    lo_b, hi_b = ball(lo), ball(hi)
    step = (hi_b - lo_b) / (points - 1)
    return [lo_b + step * i for i in range(points)]


def verify_error_growth(phi0: Callable[[arb], arb], phi1: Callable[[arb], arb],
                        delta: float, n_max: int, points: int = 1025,
                        check_points: int = 4097) -> GrowthReport:
    """Grid-measure ``|phi_n - 2cos(2^{n+3} x)|`` on ``[-pi/2^n, pi/2^n]``.

    ``phi_n = phi_{n-2}**2 (phi_{n-1} - 2) + 2``; the measured sup is
    compared with ``30**(n-1) * delta`` for ``2 <= n <= n_max``.  Grid sups
    are lower estimates of the true sups.  A row or hypothesis fails only
    when a ball certainly exceeds its bound.  The hypotheses on ``phi0`` and
    ``phi1`` are grid-checked first; failing them gives a rejected report.
    """
    if n_max < 2:
        raise InvalidInput("n_max must be >= 2")
    pi = arb.pi()
    d = ball(delta)
    for f, freq, span in ((phi0, 8, pi), (phi1, 16, pi / 2)):
        for x in _grid(-span, span, check_points):
            if abs(f(x) - 2 * (freq * x).cos()) > d:
                return GrowthReport(False, float(delta), [],
                                    f"hypothesis |phi - 2cos({freq}x)| <= delta fails near x={float(x.mid()):.6g}")
    rows = []
    for n in range(2, n_max + 1):
        span = pi / 2 ** n
        sup = arb(0)
        for x in _grid(-span, span, points):
            vals = [phi0(x), phi1(x)]
            for _ in range(n - 1):
                vals.append(phi(vals[-1], vals[-2])[0])
            err = abs(vals[-1] - 2 * (2 ** (n + 3) * x).cos())
            sup = sup.max(err)
        bound = 30 ** (n - 1) * d
        rows.append(GrowthRow(n, float(sup.upper()), float(bound), not bool(sup > bound)))
    return GrowthReport(True, float(delta), rows)


def conjugacy_error(n: int, y: Number) -> arb:
    """``|h_n(2cos y) - 2cos(2^n y)|`` at coupling 0."""
    y = ball(y)
    return abs(trace_eval(n, 0, 2 * y.cos()) - 2 * (2 ** n * y).cos())


__all__ = [
    "EvalMode", "TracePair", "SeriesPair", "PairSource", "TraceSource",
    "CosineGermSource", "phi", "phi_step", "iterate_pair", "trace_eval",
    "trace_poly_expand", "trace_series", "renormalized_delta",
    "delta_recurrence_residual", "delta_series_step", "delta_rhs",
    "verify_error_growth", "conjugacy_error", "GrowthReport", "GrowthRow",
]
