"""Truncated power series with ball coefficients and the majorant order.

A :class:`LocalSeries` holds the coefficients ``a_0..a_N`` of a function in
a local variable ``u`` about a base point ``center``.  Products truncate to
the smaller order and the discarded tail is not folded into the radii: every
coefficient that is kept is exact (up to its ball), which is what the
coefficient-wise majorant checks need.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from flint import arb

from .ball import Number, Verdict, ball, compare_le
from .errors import InvalidInput, SingularScale


@dataclass(frozen=True)
class LocalSeries:
    center: arb
    coeffs: tuple[arb, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise InvalidInput("a series needs at least one coefficient")

    @classmethod
    def of(cls, coeffs: Iterable[Number], center: Number = 0) -> "LocalSeries":
        return cls(ball(center), tuple(ball(c) for c in coeffs))

    @classmethod
    def constant(cls, value: Number, order: int, center: Number = 0) -> "LocalSeries":
        return cls(ball(center), (ball(value),) + (arb(0),) * order)

    @classmethod
    def variable(cls, order: int, center: Number = 0) -> "LocalSeries":
        """The series of ``u`` itself."""
        cs = [arb(0)] * (order + 1)
        if order >= 1:
            cs[1] = arb(1)
        return cls(ball(center), tuple(cs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> arb:
        return self.coeffs[n]

    def __call__(self, u: Number) -> arb:
        u = ball(u)
        acc = arb(0)
        for c in reversed(self.coeffs):
            acc = acc * u + c
        return acc

    def truncate(self, order: int) -> "LocalSeries":
        if order > self.order:
            raise InvalidInput(f"cannot extend order {self.order} to {order}")
        return LocalSeries(self.center, self.coeffs[: order + 1])

    def map(self, fn) -> "LocalSeries":
        return LocalSeries(self.center, tuple(fn(c) for c in self.coeffs))

    def __add__(self, other):
        if isinstance(other, LocalSeries):
            return series_add(self, other)
        return LocalSeries(self.center, (self.coeffs[0] + ball(other),) + self.coeffs[1:])

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LocalSeries):
            return series_mul(self, other)
        k = ball(other)
        return self.map(lambda c: c * k)

    __rmul__ = __mul__


def _check_compatible(f: LocalSeries, g: LocalSeries) -> None:
    if not f.center.overlaps(g.center):
        raise InvalidInput("series centers do not overlap")


def series_add(f: LocalSeries, g: LocalSeries) -> LocalSeries:
    _check_compatible(f, g)
    if f.order != g.order:
        raise InvalidInput(f"order mismatch: {f.order} vs {g.order}")
    return LocalSeries(f.center, tuple(a + b for a, b in zip(f.coeffs, g.coeffs)))


def series_mul(f: LocalSeries, g: LocalSeries) -> LocalSeries:
    """Cauchy product truncated to ``min(f.order, g.order)``."""
    _check_compatible(f, g)
    n = min(f.order, g.order)
    a, b = f.coeffs, g.coeffs
    # skip exact zeros: shifted and scaled series are often sparse at the bottom
    nz_a = [i for i in range(n + 1) if not a[i].is_zero()]
    nz_b = [j for j in range(n + 1) if not b[j].is_zero()]
    out = [arb(0)] * (n + 1)
    for i in nz_a:
        ai = a[i]
        for j in nz_b:
            if i + j > n:
                break
            out[i + j] += ai * b[j]
    return LocalSeries(f.center, tuple(out))


def series_abs_star(f: LocalSeries) -> LocalSeries:
    """Coefficient-wise ``|a_n|``: midpoint made nonnegative, radius kept."""
    # negation is exact, so the radius is not re-rounded
    return f.map(lambda c: -c if c.mid() < 0 else c)


def series_affine_arg(f: LocalSeries, scale: Number, shift: Number = 0) -> LocalSeries:
    """Series of ``u -> f(scale*u + shift)``, truncated at ``f.order``.

    With a nonzero shift the polynomial ``a_0 + ... + a_N u^N`` is
    re-expanded; any tail beyond the stored order is not represented.
    The center moves by ``shift``.
    """
    scale, shift = ball(scale), ball(shift)
    if scale.contains(0):
        raise SingularScale("scale ball contains zero")
    if shift.is_zero():
        out, p = [], arb(1)
        for c in f.coeffs:
            out.append(c * p)
            p *= scale
        return LocalSeries(f.center, tuple(out))
    # Horner in series arithmetic on the linear map scale*u + shift
    n = f.order
    acc = [arb(0)] * (n + 1)
    for c in reversed(f.coeffs):
        nxt = [arb(0)] * (n + 1)
        for i, a in enumerate(acc):
            if a.is_zero():
                continue
            nxt[i] += a * shift
            if i + 1 <= n:
                nxt[i + 1] += a * scale
        nxt[0] += c
        acc = nxt
    return LocalSeries(f.center + shift, tuple(acc))


def cos_series(order: int, phase: Number = 0, center: Number = 0) -> LocalSeries:
    """Truncated series of ``2*cos(u + phase)``.

    Coefficient ``n`` is ``2*cos(phase + n*pi/2)/n!``, taken from the
    four-cycle ``cos, -sin, -cos, sin`` so that phase 0 gives exact zeros at
    odd ``n``.
    """
    if order < 0:
        raise InvalidInput("order must be nonnegative")
    phase = ball(phase)
    if phase.is_zero():
        c, s = arb(1), arb(0)
    else:
        s, c = phase.sin_cos()
    cycle = (2 * c, -2 * s, -2 * c, 2 * s)
    out, fact = [], arb(1)
    for n in range(order + 1):
        if n:
            fact *= n
        v = cycle[n % 4]
        out.append(v if v.is_zero() else v / fact)
    return LocalSeries(ball(center), tuple(out))


@dataclass(frozen=True)
class GeometricMajorant:
    """The series ``delta * sum_{n >= start} x^n / beta^n``.

    ``head`` optionally overrides the first coefficients ``start,
    start+1, ...`` with sharper explicit values.
    """

    delta: arb
    beta: arb
    start: int = 0
    head: tuple[arb, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "delta", ball(self.delta))
        object.__setattr__(self, "beta", ball(self.beta))
        object.__setattr__(self, "head", tuple(ball(h) for h in self.head))
        if self.delta < 0:
            raise InvalidInput("majorant delta must be nonnegative")
        if not self.beta > 0:
            raise InvalidInput("majorant beta must be positive")
        if self.start < 0:
            raise InvalidInput("majorant start must be nonnegative")

    def coefficient(self, n: int) -> arb:
        if n < self.start:
            return arb(0)
        i = n - self.start
        if i < len(self.head):
            return self.head[i]
        return self.delta / self.beta ** n

    def to_series(self, order: int, center: Number = 0) -> LocalSeries:
        return LocalSeries(ball(center), tuple(self.coefficient(n) for n in range(order + 1)))


def series_le(f: LocalSeries, g: LocalSeries) -> Verdict:
    """Coefficient-wise ``f <= g`` over the common window."""
    n = min(f.order, g.order)
    return Verdict.all(compare_le(f[i], g[i]) for i in range(n + 1))


def majorant_le(f: LocalSeries, m: GeometricMajorant) -> Verdict:
    """Decide ``|f|^* <= m`` on the truncation window ``0..f.order``.

    Below ``m.start`` the coefficients are structural zeros: a ball that
    contains 0 passes, one that excludes 0 refutes.  From ``start`` on the
    upper bound of ``|a_n|`` is compared with the majorant coefficient.
    """
    verdicts = []
    for n, c in enumerate(f.coeffs):
        if n < m.start:
            verdicts.append(Verdict.VERIFIED if c.contains(0) else Verdict.REFUTED)
        else:
            verdicts.append(compare_le(abs(c), m.coefficient(n)))
    return Verdict.all(verdicts)


def scaled_max(f: LocalSeries, beta: Number, start: int = 0) -> arb:
    """Ball for ``max_{n >= start} |a_n| * beta^n`` (upper-bound use)."""
    beta = ball(beta)
    best = arb(0)
    p = beta ** start
    for c in f.coeffs[start:]:
        best = best.max(abs(c) * p)
        p *= beta
    return best


def zero_series(order: int, center: Number = 0) -> LocalSeries:
    return LocalSeries.constant(0, order, center)

