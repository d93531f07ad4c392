from fractions import Fraction

import pytest
from flint import arb

from thuemorse.ball import (Verdict, ball, compare_le, current_precision, env_precision,
                            hull, precision, retry, sign, to_decimal)
from thuemorse.errors import Undecidable


def test_verdict_combination():
    V = Verdict
    assert V.VERIFIED & V.VERIFIED is V.VERIFIED
    assert V.VERIFIED & V.UNDECIDABLE is V.UNDECIDABLE
    assert V.UNDECIDABLE & V.REFUTED is V.REFUTED
    assert V.all([]) is V.VERIFIED
    assert V.all([V.VERIFIED, V.REFUTED, V.UNDECIDABLE]) is V.REFUTED


def test_ball_conversions_enclose_the_value():
    assert ball(Fraction(1, 3)).contains(arb(1) / 3)
    assert ball("0.1").contains(arb("0.1"))
    assert ball(3).is_exact()
    b = ball(1, "0.5")
    assert b.contains(arb("1.4")) and not b.contains(2)


def test_compare_is_tri_state():
    assert compare_le(ball(1), ball(2)) is Verdict.VERIFIED
    assert compare_le(ball(3), ball(2)) is Verdict.REFUTED
    assert compare_le(ball(2, 1), ball(2)) is Verdict.UNDECIDABLE


def test_sign_and_hull():
    assert sign(ball(-2)) == -1
    assert sign(ball(0, 1)) is None
    h = hull(ball(1), ball(2))
    assert h.contains(1) and h.contains(2)


def test_precision_context_restores():
    before = current_precision()
    with precision(512):
        assert current_precision() == 512
    assert current_precision() == before


def test_env_precision(monkeypatch):
    monkeypatch.setenv("THUEMORSE_PRECISION", "128")
    assert env_precision() == 128
    monkeypatch.delenv("THUEMORSE_PRECISION")
    assert env_precision(300) == 300


def test_retry_ladder_doubles_until_decided():
    seen = []

    def fn(bits):
        seen.append(bits)
        if bits < 1024:
            raise Undecidable("need more bits")
        return bits

    assert retry(fn, 256, 4096) == 1024
    assert seen == [256, 512, 1024]


def test_retry_gives_up_at_max():
    with pytest.raises(Undecidable):
        retry(lambda bits: (_ for _ in ()).throw(Undecidable("never")), 256, 512)


def test_to_decimal_is_stable():
    d = to_decimal(ball(1) / 3)
    assert d["mid"].startswith("0.33333")
    assert to_decimal(ball(1) / 3) == d
