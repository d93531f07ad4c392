"""Nested-interval Cantor construction inside the zero set of the traces.

With ``P_k = h_{k+5}`` the root interval is ``[a, b]`` where ``a =
sqrt(2 + lam^2)`` and ``b`` is the first zero of ``P_{K-4}`` to its right.
A node at generation ``k`` is split by the smallest and the largest zero of
``P_{(k+2)K-4}`` inside it; the two children keep the outer endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

from flint import arb

from .ball import (DEFAULT_PRECISION, Number, Verdict, ball, compare_le,
                   precision, to_decimal)
from .dynamics import CosineGermSource, PairSource, TraceSource, trace_eval, trace_series
from .errors import InvalidInput, NotFound, Undecidable
from .germs import (DEFAULT_ORDER, GermCertificate, alpha, certify_germ,
                    check_regularity, constants_table, germ_from_zero, pair_factor)
from .roots import find_zero, trace_germ_constant

TRACE_OFFSET = 5
INDEX_CAP = 26
TREE_REL_WIDTH = 2.0 ** -80
SCAN_REFINE = 32


def base_point(lam: Number) -> arb:
    """``sqrt(2 + lam^2)``, the largest zero of ``h_1``."""
    return (2 + ball(lam) ** 2).sqrt()


def initial_factor(lam: Number) -> arb:
    """Renormalization factor ``16 rho`` of the pair ``(h_4, h_5)``."""
    return 16 * trace_germ_constant(lam)


def initial_germ(lam: Number, order: int = DEFAULT_ORDER,
                 bits: int = DEFAULT_PRECISION) -> GermCertificate:
    """Certify that ``(h_4, h_5)`` is ``(1, 1)``-regular at ``sqrt(2 + lam^2)``.

    Two independent derivations of the factor are cross-checked and stored
    in ``cert.checks``: the closed form ``2 tau`` with ``t = 2a`` and
    ``tau = t (t^2 - 6) sqrt(t^2 - 4)``, and the germ read off the series of
    ``h_1, h_2`` at the base point.
    """
    lam_s = str(lam) if isinstance(lam, float) else lam
    cert = certify_germ(TraceSource(lam_s, TRACE_OFFSET), lambda: base_point(lam_s),
                        lambda: initial_factor(lam_s), 1, 1, order, bits)
    with precision(cert.precision):
        a = base_point(lam_s)
        factor = initial_factor(lam_s)
        t = 2 * a
        tau = t * (t * t - 6) * (t * t - 4).sqrt()
        h1, h2 = trace_series(lam_s, a, 2, 2)
        from_zero = pair_factor(germ_from_zero(h1, h2, a), 4)
    cert.checks = {
        "two_tau": _overlap(2 * tau, factor),
        "germ_from_zero": _overlap(from_zero, factor),
    }
    cert.extras = {"two_tau": to_decimal(2 * tau), "germ_from_zero": to_decimal(from_zero)}
    return cert


def _overlap(x: arb, y: arb) -> Verdict:
    return Verdict.VERIFIED if x.overlaps(y) else Verdict.REFUTED


@dataclass
class CantorNode:
    word: str
    a: arb
    b: arb
    gen: int
    a_level: int        # trace index n with h_n(a) = 0
    b_level: int
    zero_level: int     # trace index of the endpoints created by splitting this node
    children: list["CantorNode"] = field(default_factory=list)
    failure: Optional[str] = None

    @property
    def length(self) -> arb:
        return self.b - self.a

    def walk(self) -> Iterator["CantorNode"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def leaves(self) -> list["CantorNode"]:
        return [n for n in self.walk() if not n.children]

    def to_record(self) -> dict:
        ratios = [float((c.length / self.length).mid()) for c in self.children]
        rec = {
            "word": self.word or "root",
            "gen": self.gen,
            "a": to_decimal(self.a),
            "b": to_decimal(self.b),
            "a_level": self.a_level,
            "b_level": self.b_level,
            "zero_level": self.zero_level,
            "child_ratios": [f"{r:.12e}" for r in ratios],
        }
        if self.failure:
            rec["failure"] = self.failure
        return rec


def _cap_check(K: int, depth: int, cap: int) -> None:
    if K < 5:
        raise InvalidInput("K_sim must be >= 5")
    if depth < 0:
        raise InvalidInput("depth must be >= 0")
    if depth * K + 2 * K > cap:
        raise InvalidInput(f"depth*K + 2K = {depth * K + 2 * K} exceeds the index cap {cap}")


def _zero_of(source: PairSource, j: int, lo: arb, hi: arb, step: float, side: str) -> arb:
    return find_zero(lambda x: source.evaluate(j, x), lo, hi, step, side,
                     rel_width=TREE_REL_WIDTH).ball


def _split(node: CantorNode, source: PairSource, K: int, depth: int, offset: int) -> None:
    if node.gen >= depth:
        return
    j = (node.gen + 2) * K - 4
    length = node.length
    step = float((length / (2 ** K * SCAN_REFINE)).mid())
    lo, hi = node.a.mid(), node.b.mid()
    try:
        left = _zero_of(source, j, lo, hi, step, "min")
        right = _zero_of(source, j, lo, hi, step, "max")
    except (NotFound, Undecidable) as exc:
        node.failure = f"zero isolation failed for P_{j}: {exc}"
        return
    if not left < right:
        node.failure = f"P_{j} has no two separated zeros in the interval"
        return
    lvl = j + offset
    node.zero_level = lvl
    node.children = [
        CantorNode(node.word + "0", node.a, left, node.gen + 1, node.a_level, lvl, 0),
        CantorNode(node.word + "1", right, node.b, node.gen + 1, lvl, node.b_level, 0),
    ]
    for c in node.children:
        _split(c, source, K, depth, offset)


def build_tree_from(source: PairSource, base: arb, factor: arb, K: int, depth: int,
                    offset: int = 0, base_level: int = 0) -> CantorNode:
    """Tree for an arbitrary pair source with a germ at ``base``.

    ``offset`` converts pair indices to reported levels (``5`` for traces).
    """
    j = K - 4
    # first zero of P_j to the right of the germ sits near (pi/2)/(2^j factor)
    guess = (arb.pi() / 2) / (arb(2) ** j * factor)
    step = float((guess / SCAN_REFINE).mid())
    lo = base.mid()
    root = CantorNode("", base, base, 0, base_level, j + offset, 0)
    try:
        b = _zero_of(source, j, lo, lo + 4 * guess, step, "min")
    except (NotFound, Undecidable) as exc:
        root.failure = f"root interval not found: {exc}"
        return root
    root.b = b
    _split(root, source, K, depth, offset)
    return root


def build_tree(lam: Number, K_sim: int, depth: int, cap: int = INDEX_CAP,
               bits: int = DEFAULT_PRECISION) -> CantorNode:
    """Build the nested intervals for the trace polynomials at coupling ``lam``."""
    _cap_check(K_sim, depth, cap)
    lam_s = str(lam) if isinstance(lam, float) else lam
    with precision(bits):
        return build_tree_from(TraceSource(lam_s, TRACE_OFFSET), base_point(lam_s),
                               initial_factor(lam_s), K_sim, depth, TRACE_OFFSET, 1)


def cosine_tree(K_sim: int, depth: int, factor: Number = 1, cap: int = INDEX_CAP,
                bits: int = DEFAULT_PRECISION) -> CantorNode:
    """Toy tree for ``P_k(y) = 2cos(2^k factor y)`` with the germ at 0."""
    _cap_check(K_sim, depth, cap)
    with precision(bits):
        return build_tree_from(CosineGermSource(factor, 0), arb(0), ball(factor), K_sim, depth)


def tree_failures(tree: CantorNode) -> list[tuple[str, str]]:
    return [(n.word or "root", n.failure) for n in tree.walk() if n.failure]


def nesting_verdict(tree: CantorNode) -> Verdict:
    """Children inside the parent, disjoint, and each nonempty (on balls)."""
    out = []
    for n in tree.walk():
        out.append(Verdict.VERIFIED if n.a < n.b else
                   Verdict.REFUTED if n.a >= n.b else Verdict.UNDECIDABLE)
        if len(n.children) == 2:
            c0, c1 = n.children
            out.append(Verdict.VERIFIED if (c0.b < c1.a and c0.b <= n.b and c1.a >= n.a)
                       else Verdict.REFUTED)
    return Verdict.all(out)


def endpoint_zero_verdict(tree: CantorNode, lam: Number) -> Verdict:
    """Each endpoint other than the base point is a zero of its trace."""
    out = []
    with precision(DEFAULT_PRECISION):
        for n in tree.walk():
            for x, lvl in ((n.a, n.a_level), (n.b, n.b_level)):
                out.append(Verdict.VERIFIED if trace_eval(lvl, lam, x).contains(0)
                           else Verdict.REFUTED)
    return Verdict.all(out)


@dataclass
class DimensionReport:
    K_used: int
    K_sim: int
    depth: int
    nodes: int
    min_ratio: float
    max_ratio: float
    moran_bound: float
    dimension_bound: float
    threshold: float            # 2.1^(-K_sim)
    ratio_verdict: Verdict      # min_ratio >= threshold; empirical at K_sim
    note: str = "ratios at K_sim are observations, not the rigorous bound"

    def to_dict(self) -> dict:
        return {
            "K_used": self.K_used,
            "K_sim": self.K_sim,
            "depth": self.depth,
            "nodes": self.nodes,
            "min_ratio": f"{self.min_ratio:.12e}",
            "max_ratio": f"{self.max_ratio:.12e}",
            "moran_bound": f"{self.moran_bound:.12e}",
            "dimension_bound": f"{self.dimension_bound:.12e}",
            "threshold": f"{self.threshold:.12e}",
            "ratio_verdict": self.ratio_verdict.value,
            "note": self.note,
        }


def child_ratios(tree: CantorNode) -> list[arb]:
    return [c.length / n.length for n in tree.walk() for c in n.children]


def ratio_report(tree: CantorNode, K_sim: int, K_used: Optional[int] = None) -> DimensionReport:
    rs = child_ratios(tree)
    if not rs:
        raise InvalidInput("ratio report needs a tree of depth >= 1")
    if K_used is None:
        K_used = constants_table().K
    lo = min(rs, key=lambda r: float(r.lower()))
    hi = max(rs, key=lambda r: float(r.upper()))
    min_ratio = float(lo.lower())
    depth = max(n.gen for n in tree.walk())
    threshold = arb("2.1") ** (-K_sim)
    moran = float((arb(2).log() / -lo.log()).mid()) if 0 < min_ratio < 1 else math.nan
    return DimensionReport(K_used, K_sim, depth, sum(1 for _ in tree.walk()), min_ratio,
                           float(hi.upper()), moran, dim_lower_bound(K_used),
                           float(threshold.mid()), Verdict.all(compare_le(threshold, r) for r in rs))


def dim_lower_bound(K: int) -> float:
    """``ln 2 / (K ln 2.1)``."""
    if K < 1:
        raise InvalidInput("K must be >= 1")
    with precision(128):
        return float((arb(2).log() / (K * arb("2.1").log())).mid())


@dataclass
class SideRatio:
    side: str
    outer: Optional[arb] = None     # zero of P_{K-4} nearest the germ
    inner: Optional[arb] = None     # zero of P_{2K-4} nearest that one
    ratio: Optional[arb] = None
    verdict: Verdict = Verdict.UNDECIDABLE
    failure: Optional[str] = None


@dataclass
class SpacingReport:
    K_sim: int
    threshold: float
    right: SideRatio
    left: SideRatio
    handoff: Optional[GermCertificate] = None
    handoff_delta: float = math.nan

    @property
    def verdict(self) -> Verdict:
        v = self.right.verdict & self.left.verdict
        if self.handoff is not None:
            v = v & self.handoff.verdict
        return v


def _side_ratio(source, theta, factor, K, side, threshold) -> SideRatio:
    guess = (arb.pi() / 2) / (arb(2) ** (K - 4) * factor)
    step = float((guess / SCAN_REFINE).mid())
    t = theta.mid()
    out = SideRatio(side)
    try:
        if side == "right":
            outer = _zero_of(source, K - 4, t, t + 4 * guess, step, "min")
            inner = _zero_of(source, 2 * K - 4, t, outer.mid(),
                             step / 2 ** K, "max")
            ratio = (outer - inner) / (outer - theta)
        else:
            outer = _zero_of(source, K - 4, t - 4 * guess, t, step, "max")
            inner = _zero_of(source, 2 * K - 4, outer.mid(), t, step / 2 ** K, "min")
            ratio = (inner - outer) / (theta - outer)
    except (NotFound, Undecidable) as exc:
        out.failure = str(exc)
        return out
    out.outer, out.inner, out.ratio = outer, inner, ratio
    out.verdict = compare_le(threshold, ratio)
    return out


def key_spacing_check(cert: GermCertificate, K_sim: int, handoff: bool = True) -> SpacingReport:
    """Spacing of nested zeros next to a ``(1,1)``-regular germ.

    On the right, ``outer`` is the first zero of ``P_{K-4}`` past the germ
    and ``inner`` the last zero of ``P_{2K-4}`` before it; the reported ratio
    is ``(outer - inner)/(outer - germ)``.  The left side mirrors this.
    With ``handoff`` the pair ``(P_{K-1}, P_K)`` is checked for
    ``(9 alpha^(K-7), 2)``-regularity at the right-hand zero.
    """
    if not (cert.verified and cert.delta == 1 and cert.beta == 1):
        raise InvalidInput("needs a verified (1,1)-regular germ")
    if cert.source is None:
        raise InvalidInput("certificate carries no pair source")
    if K_sim < 5:
        raise InvalidInput("K_sim must be >= 5")
    src = cert.source
    with precision(cert.precision):
        threshold = arb("2.1") ** (-K_sim)
        right = _side_ratio(src, cert.base, cert.rho, K_sim, "right", threshold)
        left = _side_ratio(src, cert.base, cert.rho, K_sim, "left", threshold)
        rep = SpacingReport(K_sim, float(threshold.mid()), right, left)
        if handoff and right.outer is not None:
            z = right.outer
            f = src.shifted(K_sim - 3).series(z, cert.order)
            try:
                factor = pair_factor(germ_from_zero(f.prev, f.curr, z), 4)
            except (ArithmeticError, InvalidInput):
                return rep
            pair = src.shifted(K_sim).series(z, cert.order)
            delta = 9 * alpha() ** (K_sim - 7)
            rep.handoff = check_regularity(pair, z, factor, float(delta.upper()), 2,
                                           src.shifted(K_sim))
            rep.handoff_delta = float(delta.upper())
    return rep


@dataclass
class StepRatio:
    plus: Optional[arb]
    minus: Optional[arb]
    verdict: Verdict
    failure: Optional[str] = None


def ratio_step_check(source: PairSource, x0: Number, factor: Number,
                     bound: Number = "2.1", bits: int = DEFAULT_PRECISION) -> StepRatio:
    """Lengths of the first zero-free intervals of ``P_{-1}`` and ``P_0``.

    ``|I_{-1}| / |I_0|`` is measured on each side of the germ, where
    ``I_j`` runs from ``x0`` to the nearest zero of ``P_j``; both ratios
    are compared with ``bound``.  For the exact cosine pair both equal 2.
    """
    with precision(bits):
        x0, factor = ball(x0), ball(factor)
        reach = 4 / factor
        step = float((reach / 256).mid())
        t = x0.mid()
        try:
            p0 = _zero_of(source, 0, t, t + reach, step, "min") - x0
            p1 = _zero_of(source, -1, t, t + 2 * reach, step, "min") - x0
            m0 = x0 - _zero_of(source, 0, t - reach, t, step, "max")
            m1 = x0 - _zero_of(source, -1, t - 2 * reach, t, step, "max")
        except (NotFound, Undecidable) as exc:
            return StepRatio(None, None, Verdict.UNDECIDABLE, str(exc))
        plus, minus = p1 / p0, m1 / m0
        b = ball(bound)
        return StepRatio(plus, minus, compare_le(plus, b) & compare_le(minus, b))


def tree_records(tree: CantorNode) -> list[dict]:
    """One record per node, in word order (breadth first, 0 before 1)."""
    nodes = sorted(tree.walk(), key=lambda n: (n.gen, n.word))
    return [n.to_record() for n in nodes]
