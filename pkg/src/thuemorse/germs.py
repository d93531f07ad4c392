"""Regular germs: detection, certification and propagation of bounds.

A pair ``(P_{-1}, P_0)`` with a germ at ``x0`` and renormalization factor
``rho`` has renormalized members ``Q_k(x) = P_k(x/(2^k rho) + x0)`` and
deviations ``Delta_k = Q_k - 2cos``.  The pair is ``(delta, beta)``-regular
when ``|Delta_{-1}|^*`` and ``|Delta_0|^*`` are both dominated by
``delta * sum_{n>=3} x^n / beta^n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

from flint import arb

from .ball import (DEFAULT_PRECISION, MAX_PRECISION, Number, Verdict, ball,
                   compare_le, current_precision, precision, to_decimal)
from .dynamics import PairSource, SeriesPair, iterate_pair, renormalized_delta
from .errors import InvalidInput, OutOfHypothesis, Refuted, Undecidable
from .series import (GeometricMajorant, LocalSeries, cos_series, majorant_le,
                     scaled_max, series_affine_arg)

DEFAULT_ORDER = 64
GRID_PER_UNIT = 1024


def alpha() -> arb:
    """The contraction rate ``2**(-1/2)``."""
    return 1 / arb(2).sqrt()


@dataclass
class GermCertificate:
    base: arb
    rho: arb
    delta: float
    beta: float
    order: int
    precision: int
    verdict: Verdict
    source: Optional[PairSource] = field(default=None, repr=False, compare=False)
    # max_n |Delta_{j,n}| * beta^n for j = -1, 0 (upper bounds)
    measured: tuple[float, float] = (math.nan, math.nan)
    checks: dict[str, Verdict] = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.verdict is Verdict.VERIFIED

    def to_dict(self) -> dict:
        return {
            "base": to_decimal(self.base),
            "rho": to_decimal(self.rho),
            "delta": self.delta,
            "beta": self.beta,
            "order": self.order,
            "precision": self.precision,
            "verdict": self.verdict.value,
            "measured_max_prev": self.measured[0],
            "measured_max_curr": self.measured[1],
            "checks": {k: v.value for k, v in self.checks.items()},
            **self.extras,
        }


def germ_from_zero(f0: LocalSeries, f1: LocalSeries, x0: Number) -> arb:
    """Germ constant ``sqrt(2 - f1(x0)) * |f0'(x0) f1(x0)|``.

    ``f0`` and ``f1`` are local series about ``x0`` of consecutive members
    of a sequence with ``f0(x0) = 0``.  Then ``f_k(x) = 2 - (2^{k-3}
    rho)^2 (x-x0)^2 + O((x-x0)^3)`` for ``k >= 3``.
    """
    x0 = ball(x0)
    if not (f0.center.overlaps(x0) and f1.center.overlaps(x0)):
        raise InvalidInput("series must be centered at x0")
    value0, slope0, value1 = f0[0], f0[1], f1[0]
    if not value0.contains(0):
        raise Refuted("f0(x0) is certainly nonzero")
    if value1 >= 2:
        raise Refuted("f1(x0) >= 2: the germ is degenerate")
    if not value1 < 2:
        raise Undecidable("cannot certify f1(x0) < 2")
    if slope0.contains(0) or value1.contains(0):
        raise Undecidable("f0'(x0) or f1(x0) not certified nonzero")
    return (2 - value1).sqrt() * abs(slope0 * value1)


def pair_factor(rho: arb, pair_index: int) -> arb:
    """Renormalization factor of ``(f_{j-1}, f_j)`` from the germ constant.

    ``f_j = 2 - (2^{j-3} rho)^2 u^2 + ...`` so ``Q_0(x) = f_j(x/R + x0)``
    matches ``2 - x^2`` for ``R = 2^{j-3} rho`` (``j >= 4``).
    """
    if pair_index < 4:
        raise InvalidInput("pair index must be >= 4")
    return arb(2) ** (pair_index - 3) * rho


def renormalized_deviations(pair: SeriesPair, rho: Number) -> tuple[LocalSeries, LocalSeries]:
    """``(Delta_{-1}, Delta_0)`` series of a pair treated as the base pair."""
    rho = ball(rho)
    cos = cos_series(pair.order, 0, pair.center)
    q_prev = series_affine_arg(pair.prev, 2 / rho)
    q_curr = series_affine_arg(pair.curr, 1 / rho)
    return q_prev - cos, q_curr - cos


def check_regularity(pair: SeriesPair, x0: Number, rho: Number, delta: float,
                     beta: float, source: PairSource | None = None) -> GermCertificate:
    """Certify ``(delta, beta)``-regularity of ``pair`` at ``x0``."""
    x0 = ball(x0)
    if not pair.center.overlaps(x0):
        raise InvalidInput("pair is not centered at x0")
    rho = ball(rho)
    if rho.contains(0):
        raise InvalidInput("rho ball contains zero")
    d_prev, d_curr = renormalized_deviations(pair, rho)
    m = GeometricMajorant(ball(delta), ball(beta), 3)
    verdict = majorant_le(d_prev, m) & majorant_le(d_curr, m)
    measured = (float(scaled_max(d_prev, beta, 3).upper()),
                float(scaled_max(d_curr, beta, 3).upper()))
    return GermCertificate(x0, rho, float(delta), float(beta), pair.order,
                           current_precision(), verdict, source, measured)


Resolvable = Union[Number, Callable[[], arb]]


def _resolve(v: Resolvable) -> arb:
    return v() if callable(v) else ball(v)


def certify_germ(source: PairSource, base: Resolvable, rho: Resolvable,
                 delta: float = 1, beta: float = 1, order: int = DEFAULT_ORDER,
                 bits: int = DEFAULT_PRECISION, max_bits: int = MAX_PRECISION) -> GermCertificate:
    """Build the base-pair series from ``source`` and check regularity.

    Undecidable verdicts are retried with doubled precision up to
    ``max_bits``.  ``base`` and ``rho`` may be zero-argument callables so
    that they are recomputed at each precision.
    """
    while True:
        with precision(bits):
            x0, r = _resolve(base), _resolve(rho)
            cert = check_regularity(source.series(x0, order), x0, r, delta, beta, source)
        if cert.verdict is not Verdict.UNDECIDABLE or bits >= max_bits:
            return cert
        bits = min(2 * bits, max_bits)


def propagate_bound_step(delta: Number) -> GeometricMajorant:
    """Output bound for one step of the deviation recurrence.

    From ``|Delta_{k-1,n}|, |Delta_{k,n}| <= delta`` (``n >= 3``,
    ``delta <= 1``): ``|Delta_{k+1}|^* <= delta (4x^3/2^3 + 4x^4/2^4 +
    9 sum_{n>=5} x^n/2^n)``.
    """
    d = ball(delta)
    if d < 0:
        raise InvalidInput("delta must be nonnegative")
    if d > 1:
        raise OutOfHypothesis("the one-step bound needs delta <= 1")
    return GeometricMajorant(9 * d, 2, 3, head=(d / 2, d / 4))


def propagate_bound_shifted(delta: float, beta: float) -> GeometricMajorant:
    """Bound ``152 delta sum x^n/(2 beta)^n`` for the shifted recurrence."""
    if delta < 0 or delta > 1:
        raise OutOfHypothesis("shifted bound needs 0 <= delta <= 1")
    if not 0 < beta <= 1:
        raise OutOfHypothesis("shifted bound needs 0 < beta <= 1")
    return GeometricMajorant(152 * ball(delta), 2 * ball(beta), 0)


def shifted_delta_step(d_prev: LocalSeries, d_curr: LocalSeries, t0: Number) -> LocalSeries:
    """Shifted deviation recurrence about phase ``t0`` (series form)."""
    t0 = ball(t0)
    n = min(d_prev.order, d_curr.order)
    c = d_curr.center
    half = series_affine_arg(d_curr.truncate(n), arb(1) / 2)
    quarter = series_affine_arg(d_prev.truncate(n), arb(1) / 4)
    cos_h = series_affine_arg(cos_series(n, t0 / 2, c), arb(1) / 2)
    cos_q = series_affine_arg(cos_series(n, t0 / 4, c), arb(1) / 4)
    return (2 + cos_h) * half + quarter * (2 * cos_q + quarter) * (cos_h - 2 + half)


def decay_envelope(k: int) -> arb:
    """``9 alpha^(k-2)``: coefficient envelope of ``|Delta_k|^*`` in base 2."""
    return 9 * alpha() ** (k - 2)


def deviation_tower(cert: GermCertificate, k: int) -> tuple[LocalSeries, LocalSeries]:
    """Series of ``(Delta_{k-1}, Delta_k)`` obtained by iterating the pair."""
    if cert.source is None:
        raise InvalidInput("certificate carries no pair source")
    pair = iterate_pair(cert.source.series(cert.base, cert.order), k)
    return renormalized_deviations(pair, arb(2) ** k * cert.rho)


def regularity_decay(cert: GermCertificate, k: int) -> GermCertificate:
    """Certify that ``(P_{k-1}, P_k)`` is ``(9 alpha^(k-3), 2)``-regular.

    The iterated pair is expanded and checked directly; its renormalization
    factor is ``2^k rho``.
    """
    if k < 2:
        raise InvalidInput("k must be >= 2")
    if not (cert.verified and cert.delta == 1 and cert.beta == 1):
        raise InvalidInput("needs a verified (1,1)-regular germ")
    if cert.source is None:
        raise InvalidInput("certificate carries no pair source")
    delta = float((9 * alpha() ** (k - 3)).mid())
    bits = cert.precision
    while True:
        with precision(bits):
            pair = iterate_pair(cert.source.series(cert.base, cert.order), k)
            rho_k = arb(2) ** k * cert.rho
            d_prev, d_curr = renormalized_deviations(pair, rho_k)
            m = GeometricMajorant(9 * alpha() ** (k - 3), 2, 3)
            verdict = majorant_le(d_prev, m) & majorant_le(d_curr, m)
            measured = (float(scaled_max(d_prev, 2, 3).upper()),
                        float(scaled_max(d_curr, 2, 3).upper()))
        if verdict is not Verdict.UNDECIDABLE or bits >= MAX_PRECISION:
            break
        bits *= 2
    return GermCertificate(cert.base, rho_k, delta, 2.0, cert.order, bits,
                           verdict, cert.source.shifted(k), measured)


@dataclass
class ConstantsTable:
    delta0: arb
    delta1: arb
    delta2: arb
    delta3: arb
    n_alpha: int
    alpha: arb
    beta_local: arb
    m0: int
    ctilde: list[arb]
    c: list[arb]
    K: int
    residuals: dict[str, arb]
    n_alpha_check: Verdict
    shifted_check: Verdict

    def rows(self) -> list[tuple[str, arb | int, str]]:
        """``(name, value, check)`` rows in a fixed order."""
        out: list[tuple[str, arb | int, str]] = [
            ("delta0", self.delta0, ""),
            ("delta1", self.delta1, ""),
            ("delta2", self.delta2, ""),
            ("delta3", self.delta3, ""),
            ("n_alpha", self.n_alpha, f"9*alpha^(n_alpha-3)<=delta1:{self.n_alpha_check.value}"),
            ("alpha", self.alpha, ""),
            ("beta_local", self.beta_local, ""),
            ("M0", self.m0, f"152^3*M0*delta2<1:{self.shifted_check.value}"),
        ]
        for m, (ct, cm) in enumerate(zip(self.ctilde, self.c)):
            out.append((f"Ctilde_{m}", ct, ""))
            out.append((f"C_{m}", cm, ""))
        out.append(("K", self.K, "minimal"))
        for name, r in self.residuals.items():
            out.append((name, r, "pass" if r >= 0 else "fail"))
        return out


def _k_residuals(K: int, c6: arb, a: arb, d2: arb, d3: arb, n_alpha: int) -> dict[str, arb]:
    return {
        "residual_K_ge_n_alpha_plus_4": arb(K - (n_alpha + 4)),
        "residual_delta2_minus_9alpha^(K-7)": d2 - 9 * a ** (K - 7),
        "residual_delta3_minus_C6alpha^(K-4)": d3 - c6 * a ** (K - 4),
    }


def _k_ok(res: dict[str, arb]) -> Verdict:
    a, b, c = res.values()
    return (compare_le(arb(0), a) & (Verdict.VERIFIED if b > 0 else
                                     Verdict.REFUTED if b <= 0 else Verdict.UNDECIDABLE)
            & compare_le(arb(0), c))


def constants_table(m_max: int = 6) -> ConstantsTable:
    """All absolute constants, with the minimal certified ``K``.

    ``C~_0 = 9/(4 - pi)``, ``C_m = C~_m (2^{m-1} pi)^3`` and
    ``C~_{m+1} = C~_m (1/(2 alpha) + (4 + C_m)^2/(64 alpha^2))``.  ``K`` is
    the least integer with ``K >= n_alpha + 4``, ``9 alpha^(K-7) < delta2``
    and ``C_6 alpha^(K-4) <= delta3``.
    """
    if m_max < 6:
        raise InvalidInput("m_max must be >= 6 (K depends on C_6)")
    pi = arb.pi()
    a = alpha()
    d0, d1, d2 = ball("0.01"), ball("0.0005"), ball("1e-10")
    n_alpha = 40
    d3 = arb(30) ** (-n_alpha) / 4000
    ctilde = [9 / (4 - pi)]
    c: list[arb] = []
    for m in range(m_max + 1):
        c.append(ctilde[m] * (arb(2) ** (m - 1) * pi) ** 3)
        if m < m_max:
            ctilde.append(ctilde[m] * (1 / (2 * a) + (4 + c[m]) ** 2 / (64 * a * a)))
    c6 = c[6]
    # log-space estimate, then certify and walk to the exact minimum
    ln_a = float(a.log().mid())
    k1 = n_alpha + 4
    k2 = 7 + math.log(float(d2.mid()) / 9) / ln_a
    k3 = 4 + float((d3.log() - c6.log()).mid()) / ln_a
    K = max(k1, math.floor(max(k2, k3)) - 2)
    while _k_ok(_k_residuals(K, c6, a, d2, d3, n_alpha)) is not Verdict.VERIFIED:
        K += 1
    while K - 1 >= k1 and _k_ok(_k_residuals(K - 1, c6, a, d2, d3, n_alpha)) is Verdict.VERIFIED:
        K -= 1
    return ConstantsTable(
        delta0=d0, delta1=d1, delta2=d2, delta3=d3, n_alpha=n_alpha, alpha=a,
        beta_local=2 - pi / 2 - ball("0.01"), m0=10, ctilde=ctilde, c=c, K=K,
        residuals=_k_residuals(K, c6, a, d2, d3, n_alpha),
        n_alpha_check=compare_le(9 * a ** (n_alpha - 3), d1),
        shifted_check=compare_le(arb(152) ** 3 * 10 * d2, arb(1)),
    )


def ctilde_m(m: int) -> arb:
    """``C~_m`` without building the whole table."""
    pi = arb.pi()
    a = alpha()
    ct = 9 / (4 - pi)
    for j in range(m):
        cj = ct * (arb(2) ** (j - 1) * pi) ** 3
        ct = ct * (1 / (2 * a) + (4 + cj) ** 2 / (64 * a * a))
    return ct


@dataclass
class ConvergenceRow:
    k: int
    sup_delta: float
    bound: float            # C_m alpha^k
    pointwise_ok: bool      # |Delta_k(x)| <= C~_m alpha^k |x|^3 at every grid point
    worst_margin: float     # min over grid of bound(x) - |Delta_k(x)|
    rigorous_sup: float | None = None

    @property
    def ok(self) -> bool:
        return self.pointwise_ok and self.sup_delta <= self.bound


@dataclass
class ConvergenceReport:
    m: int
    points: int
    rows: list[ConvergenceRow]
    decay_ratio: float      # max_k S_{k+1}/S_k
    fitted_ratio: float     # exp of the least-squares slope of ln S_k
    note: str = "grid sups are lower estimates of the true sups"

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


def _grid_points(half_width: arb, per_unit: int) -> list[arb]:
    n = max(2, int(math.ceil(2 * float(half_width.mid()) * per_unit)))
    step = 2 * half_width / n
    return [-half_width + step * i for i in range(n + 1)]


def convergence_report(cert: GermCertificate, m: int, k_range: Iterable[int],
                       grid: int = GRID_PER_UNIT, rigorous: bool = False,
                       cover: int = 256) -> ConvergenceReport:
    """Measure ``|Delta_k|`` on ``[-2^{m-1} pi, 2^{m-1} pi]``.

    Every grid point is checked against ``C~_m alpha^k |x|^3``; a point
    passes unless its ball certainly exceeds the bound.  With
    ``rigorous=True`` the interval is also covered by ``cover`` balls and
    the upper bound of ``|Delta_k|`` over the cover is reported.
    """
    ks = sorted(k_range)
    if any(k < 2 * m + 1 for k in ks):
        raise InvalidInput("convergence bound needs k >= 2m + 1")
    if not cert.verified or cert.source is None:
        raise InvalidInput("needs a verified germ with a pair source")
    with precision(cert.precision):
        a = alpha()
        ct = ctilde_m(m)
        cm = ct * (arb(2) ** (m - 1) * arb.pi()) ** 3
        half = arb(2) ** (m - 1) * arb.pi()
        xs = _grid_points(half, grid)
        cubes = [abs(x) ** 3 for x in xs]
        rows = []
        for k in ks:
            ak = a ** k
            sup = arb(0)
            ok = True
            margin = math.inf
            for x, x3 in zip(xs, cubes):
                d = abs(renormalized_delta(cert, k, x))
                sup = sup.max(d)
                b = ct * ak * x3
                if d > b:
                    ok = False
                margin = min(margin, float((b - d).mid()))
            rig = None
            if rigorous:
                edges = [-half + 2 * half * i / cover for i in range(cover + 1)]
                top = arb(0)
                for lo, hi in zip(edges, edges[1:]):
                    top = top.max(abs(renormalized_delta(cert, k, lo.union(hi))))
                rig = float(top.upper())
            rows.append(ConvergenceRow(k, float(sup.upper()), float((cm * ak).mid()),
                                       ok, margin, rig))
    sups = [r.sup_delta for r in rows]
    ratios = [b / a_ for a_, b in zip(sups, sups[1:]) if a_ > 0]
    decay = max(ratios) if ratios else math.nan
    fitted = math.nan
    pts = [(r.k, math.log(r.sup_delta)) for r in rows if r.sup_delta > 0]
    if len(pts) >= 2:
        mk = sum(k for k, _ in pts) / len(pts)
        ml = sum(v for _, v in pts) / len(pts)
        num = sum((k - mk) * (v - ml) for k, v in pts)
        den = sum((k - mk) ** 2 for k, _ in pts)
        fitted = math.exp(num / den)
    return ConvergenceReport(m, len(xs), rows, decay, fitted)
