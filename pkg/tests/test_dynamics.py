import random
from fractions import Fraction

import pytest
from flint import arb, fmpq, fmpq_poly
from hypothesis import given, settings, strategies as st

from thuemorse.ball import ball
from thuemorse.cantor import base_point, initial_germ
from thuemorse.dynamics import (CosineGermSource, EvalMode, SeriesPair, TracePair,
                                conjugacy_error, delta_recurrence_residual, iterate_pair, phi,
                                phi_step, renormalized_delta, trace_eval, trace_poly_expand,
                                trace_series, verify_error_growth)
from thuemorse.errors import CapExceeded, InvalidInput
from thuemorse.germs import ctilde_m, alpha
from thuemorse.series import LocalSeries, cos_series, series_affine_arg


def test_phi_fixed_point():
    two = LocalSeries.constant(2, 8)
    p = phi_step(SeriesPair(two, two))
    assert all(a.is_exact() for a in p.curr.coeffs)
    assert p.curr[0] == 2 and all(c == 0 for c in p.curr.coeffs[1:])
    assert phi(2, 2) == (2, 2)


def test_phi_on_cosines_doubles_the_frequency():
    n = 24
    prev = series_affine_arg(cos_series(n), Fraction(1, 2))
    p = phi_step(SeriesPair(prev, cos_series(n)))
    target = series_affine_arg(cos_series(n), 2)
    for a, b in zip(p.curr.coeffs, target.coeffs):
        assert (a - b).contains(0)


def test_phi_zero_previous_gives_two():
    p = phi_step(SeriesPair(LocalSeries.constant(0, 4), cos_series(4)))
    assert p.curr[0] == 2 and all(c == 0 for c in p.curr.coeffs[1:])


def test_iterate_pair_indices():
    two = LocalSeries.constant(2, 2)
    assert iterate_pair(SeriesPair(two, two), 5).index == 5
    with pytest.raises(InvalidInput):
        iterate_pair(SeriesPair(two, two, 3), 1)


def test_trace_eval_examples():
    assert trace_eval(1, 0, Fraction(2)) == 2
    assert trace_eval(3, 0, Fraction(1)) == -1
    assert trace_eval(3, 0, ball(1)).contains(-1)
    for lam in (0, "0.5", 1, 3):
        assert trace_eval(1, lam, base_point(lam)).contains(0)


def test_trace_eval_rejects_bad_index():
    with pytest.raises(InvalidInput):
        trace_eval(0, 0, 1)


def test_expansion_examples():
    x = fmpq_poly([0, 1])
    assert trace_poly_expand(2, 0) == x ** 4 - 4 * x ** 2 + 2
    assert trace_poly_expand(1, 1) == x ** 2 - 3
    with pytest.raises(CapExceeded):
        trace_poly_expand(11, 0)


def test_expansion_degree_law():
    for n in range(1, 9):
        p = trace_poly_expand(n, Fraction(2, 3))
        assert p.degree() == 2 ** n
        assert p.coeffs()[-1] == 1


def test_expanded_matches_recurrence_on_random_rationals():
    rng = random.Random(4)
    p = trace_poly_expand(4, 0)
    for _ in range(1000):
        q = Fraction(rng.randint(-300, 300), rng.randint(1, 100))
        assert p(fmpq(q.numerator, q.denominator)) == trace_eval(4, 0, fmpq(q.numerator, q.denominator))


def test_trace_pair_modes_agree():
    point, expanded = TracePair("0.5"), TracePair(Fraction(1, 2), EvalMode.EXPANDED)
    for x in ("0.3", "1.7", "-1.2"):
        assert point.h(5, x).overlaps(expanded.h(5, ball(x)))
    exact = trace_eval(3, Fraction(1, 2), Fraction(1, 3))
    assert expanded.h(3, Fraction(1, 3)) == fmpq(exact.numerator, exact.denominator)


def test_trace_series_matches_pointwise():
    s = trace_series(1, "1.5", 12, 6)
    for n, f in enumerate(s, start=1):
        assert f[0].overlaps(trace_eval(n, 1, ball("1.5")))


def test_conjugacy_small():
    for n in (1, 2, 5, 9):
        for y in ("0.1", "1", "2.5"):
            assert conjugacy_error(n, y) < ball("1e-60")


@pytest.fixture(scope="module")
def germ_lam1():
    return initial_germ(1)


def test_exact_cosine_germ_has_no_deviation():
    src = CosineGermSource(3, 0)
    germ = type("G", (), {"source": src, "base": arb(0), "rho": arb(3)})
    for k in (0, 3, 7):
        for x in ("-1.3", "0.2", "2"):
            assert renormalized_delta(germ, k, x) < ball("1e-60")


def test_delta_at_zero(germ_lam1):
    for k in (0, 4, 9):
        assert renormalized_delta(germ_lam1, k, 0).contains(0)


def test_delta_bound_at_one(germ_lam1):
    assert abs(renormalized_delta(germ_lam1, 10, 1)) <= ctilde_m(0) * alpha() ** 10


def test_recurrence_residual(germ_lam1):
    rng = random.Random(7)
    src = CosineGermSource(2, 0)
    cos_germ = type("G", (), {"source": src, "base": arb(0), "rho": arb(2)})
    for _ in range(100):
        x = ball(str(rng.uniform(-3.14, 3.14)))
        assert delta_recurrence_residual(germ_lam1, 6, x) <= ball(2) ** -100
        assert delta_recurrence_residual(cos_germ, 4, x) <= ball(2) ** -100


def test_residual_first_step_matches_direct_iteration(germ_lam1):
    x = ball("0.7")
    y = x / (2 * germ_lam1.rho) + germ_lam1.base
    direct = trace_eval(6, 1, y) - 2 * x.cos()
    assert direct.overlaps(renormalized_delta(germ_lam1, 1, x))


def test_error_growth_exact_cosines():
    rep = verify_error_growth(lambda x: 2 * (8 * x).cos(), lambda x: 2 * (16 * x).cos(), 0, 4,
                              points=65, check_points=129)
    assert rep.ok
    assert all(r.sup_error < 1e-60 for r in rep.rows)


def test_error_growth_perturbed():
    d = ball(1e-6)   # the same binary value the checker uses
    rep = verify_error_growth(lambda x: 2 * (8 * x).cos() + d * (3 * x).sin(),
                              lambda x: 2 * (16 * x).cos() - d * x.cos(), 1e-6, 5,
                              points=257, check_points=513)
    assert rep.ok
    assert rep.rows[0].bound == pytest.approx(30e-6)


def test_error_growth_rejects_bad_hypothesis():
    rep = verify_error_growth(lambda x: 2 * (8 * x).cos() + 1, lambda x: 2 * (16 * x).cos(),
                              1e-3, 3, points=9, check_points=17)
    assert not rep.accepted and not rep.ok


@given(st.integers(1, 12), st.floats(0, 3.14159))
@settings(max_examples=60, deadline=None)
def test_conjugacy_property(n, y):
    assert conjugacy_error(n, repr(y)) < ball("1e-50")
