"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Tolerances and time limits are fixed here and must not be relaxed.
"""

import math
import random
import time
from fractions import Fraction

import mpmath
from flint import arb, fmpq

from conftest import ACCEPTANCE
from thuemorse.ball import Verdict, ball
from thuemorse.cantor import (build_tree, dim_lower_bound, endpoint_zero_verdict, initial_germ,
                              nesting_verdict, ratio_report, ratio_step_check, tree_failures)
from thuemorse.dynamics import CosineGermSource, trace_eval, trace_poly_expand, verify_error_growth
from thuemorse.germs import (alpha, certify_germ, constants_table, convergence_report,
                             regularity_decay)
from thuemorse.roots import min_zero


def record(num, ok, detail, started=None, limit=None):
    if started is not None:
        took = time.perf_counter() - started
        detail = f"{detail}; {took:.1f}s (limit {limit}s)"
        ok = ok and took < limit
    ACCEPTANCE.append((num, ok, detail))
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_01_cosine_conjugacy():
    t0 = time.perf_counter()
    pi = arb.pi()
    worst = arb(0)
    for n in range(1, 15):
        for i in range(512):
            y = pi * i / 511
            worst = worst.max(abs(trace_eval(n, 0, 2 * y.cos()) - 2 * (2 ** n * y).cos()))
    record(1, worst <= ball("1e-30"), f"max error {float(worst.upper()):.2e} <= 1e-30", t0, 10)


def test_02_expansion_equals_recurrence():
    t0 = time.perf_counter()
    rng = random.Random(2)
    mismatches = 0
    for _ in range(100):
        x = fmpq(rng.randint(-400, 400), rng.randint(1, 97))
        lam = Fraction(rng.randint(-30, 30), rng.randint(1, 11))
        for n in range(1, 9):
            if trace_poly_expand(n, lam)(x) != trace_eval(n, lam, x):
                mismatches += 1
    record(2, mismatches == 0, f"{mismatches} mismatches over 100 rationals, n<=8", t0, 30)


def test_03_initial_germ():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for lam in ("0", "0.5", "1", "2", "5"):
        cert = initial_germ(lam, order=64, bits=256)
        cross = all(v is Verdict.VERIFIED for v in cert.checks.values())
        ok = ok and cert.verified and cert.precision == 256 and cross
        parts.append(f"lam={lam}:{cert.verdict.value}/cross={'ok' if cross else 'bad'}")
    record(3, ok, ", ".join(parts), t0, 60)


def test_04_decay_envelope():
    t0 = time.perf_counter()
    cert = initial_germ(1)
    ok = True
    worst = 0.0
    for k in range(4, 15):
        out = regularity_decay(cert, k)
        env = 9 * alpha() ** (k - 2)
        ok = ok and out.verified and ball(out.measured[1]) <= env
        worst = max(worst, out.measured[1] / float(env.mid()))
    record(4, ok, f"k=4..14 verified; worst measured/envelope {worst:.3f}", t0, 120)


def test_05_convergence_m0():
    t0 = time.perf_counter()
    ok = True
    parts = []
    for lam in ("0.5", "1", "2"):
        rep = convergence_report(initial_germ(lam), 0, range(5, 21))
        ok = ok and all(r.pointwise_ok for r in rep.rows) and rep.decay_ratio <= 0.76
        parts.append(f"lam={lam}: pointwise={'ok' if all(r.pointwise_ok for r in rep.rows) else 'bad'}"
                     f" decay={rep.decay_ratio:.3f} fit={rep.fitted_ratio:.3f} pts={rep.points}")
    record(5, ok, "; ".join(parts), t0, 300)


def test_06_zero_location_property():
    rng = random.Random(6)
    pi = arb.pi()
    fails = 0
    worst = 0.0
    for _ in range(200):
        delta = ball(rng.uniform(1e-6, 0.01))
        if delta >= ball("0.01"):
            continue
        freq, phase, amp = rng.uniform(0.1, 30), rng.uniform(0, 6.3), rng.uniform(-1, 1)
        shape = rng.choice(("sin", "const", "mix"))

        def f(x, d=delta, fr=freq, ph=phase, a=amp, s=shape):
            if s == "sin":
                g = a * (fr * x + ph).sin()
            elif s == "const":
                g = ball(a)
            else:
                g = a * ((fr * x).sin() + (3 * x + ph).cos()) / 2
            return 2 * x.cos() + d * g

        z = min_zero(f, 0, pi, math.pi / 64)
        err = abs(z - pi / 2)
        if err > delta:
            fails += 1
        worst = max(worst, float((err / delta).upper()))
    record(6, fails == 0, f"200 perturbations, {fails} outside delta; worst |z-pi/2|/delta {worst:.3f}")


def test_07_single_step_ratio():
    rng = random.Random(7)
    d1 = ball("0.0005")
    ok = True
    worst = 0.0
    for _ in range(20):
        rho = ball(repr(rng.uniform(0.5, 40)))
        x0 = ball(repr(rng.uniform(-2, 2)))
        devs = [tuple([0, 0, 0] + [d1 * rng.uniform(-0.95, 0.95) / 2 ** n for n in range(3, 12)])
                for _ in range(2)]
        src = CosineGermSource(rho, x0, devs[0], devs[1])
        cert = certify_germ(src, x0, rho, delta=d1, beta=2, order=32)
        res = ratio_step_check(src, x0, rho)
        ok = ok and cert.verified and res.verdict is Verdict.VERIFIED
        if res.plus is not None:
            worst = max(worst, float(res.plus.upper()), float(res.minus.upper()))
    record(7, ok, f"20 (delta1,2)-regular pairs; max ratio {worst:.6f} <= 2.1")


def test_08_error_growth():
    d = ball(1e-6)
    rep = verify_error_growth(lambda x: 2 * (8 * x).cos() + d * (5 * x + 1).sin(),
                              lambda x: 2 * (16 * x).cos() - d * (3 * x).cos(), 1e-6, 6)
    detail = ", ".join(f"n={r.n}:{r.sup_error:.1e}<={r.bound:.1e}" for r in rep.rows)
    record(8, rep.ok and [r.n for r in rep.rows] == [2, 3, 4, 5, 6], detail or rep.reason)


def test_09_constants():
    t = constants_table()
    a = alpha()
    ok = (t.delta0.contains(ball("0.01")) and t.delta1.contains(ball("0.0005"))
          and t.delta2.contains(ball("1e-10"))
          and t.delta3.overlaps(arb(30) ** -40 / 4000)
          and t.n_alpha == 40 and t.n_alpha_check is Verdict.VERIFIED
          and (9 * a ** 37 <= t.delta1)
          and t.ctilde[0].overlaps(9 / (4 - arb.pi()))
          and all(r >= 0 for r in t.residuals.values())
          and t.K >= t.n_alpha + 4
          and 9 * a ** (t.K - 7) < t.delta2
          and t.c[6] * a ** (t.K - 4) <= t.delta3)
    res = ", ".join(f"{float(v.mid()):.3e}" for v in t.residuals.values())
    record(9, ok, f"K={t.K}; residuals {res}")


def test_10_cantor_tree():
    t0 = time.perf_counter()
    tree = build_tree(1, 5, 3)
    rep = ratio_report(tree, 5)
    ok = (sum(1 for _ in tree.walk()) == 15 and not tree_failures(tree)
          and nesting_verdict(tree) is Verdict.VERIFIED
          and endpoint_zero_verdict(tree, 1) is Verdict.VERIFIED
          and rep.min_ratio > 0 and rep.moran_bound > 0)
    zero = build_tree(0, 5, 3)
    mpmath.mp.dps = 60
    worst = mpmath.mpf(0)
    for n in zero.walk():
        for x, lvl in ((n.a, n.a_level), (n.b, n.b_level)):
            e = mpmath.mpf(x.mid().str(55, radius=False))
            j = int(mpmath.nint((mpmath.acos(e / 2) * 2 ** (lvl + 1) / mpmath.pi - 1) / 2))
            worst = max(worst, abs(e - 2 * mpmath.cos((2 * j + 1) * mpmath.pi / 2 ** (lvl + 1))))
    ok = ok and sum(1 for _ in zero.walk()) == 15 and worst < mpmath.mpf("1e-20")
    record(10, ok, f"15 nodes, min ratio {rep.min_ratio:.4e}, moran {rep.moran_bound:.4f}; "
                   f"lam=0 lattice error {float(worst):.1e}", t0, 600)


def test_11_dimension_formula():
    mpmath.mp.dps = 50
    K_cert = constants_table().K
    worst = 0.0
    for K in (1, 10, 80, K_cert):
        ref = mpmath.log(2) / (K * mpmath.log(mpmath.mpf("2.1")))
        worst = max(worst, float(abs(dim_lower_bound(K) - ref)))
    ok = worst <= 1e-15 and abs(dim_lower_bound(1) - 0.9344) < 5e-4
    record(11, ok, f"max deviation {worst:.1e}; K=1 -> {dim_lower_bound(1):.4f}")
