"""Ball arithmetic helpers.

Balls are ``flint.arb`` values: a binary midpoint with a nonnegative error
radius, where every operation returns a ball containing the exact result.
This module adds conversions, a tri-state comparison and the precision
retry ladder used by every certifying routine.
"""

from __future__ import annotations

import enum
import os
from collections.abc import Callable
from contextlib import contextmanager
from fractions import Fraction
from typing import TypeVar, Union

import flint
from flint import arb, fmpq

from .errors import Undecidable

BallReal = arb

DEFAULT_PRECISION = 256
MAX_PRECISION = 4096

Number = Union[arb, fmpq, Fraction, int, float, str]
T = TypeVar("T")


class Verdict(str, enum.Enum):
    VERIFIED = "verified"
    REFUTED = "refuted"
    UNDECIDABLE = "undecidable"

    def __and__(self, other: "Verdict") -> "Verdict":
        if Verdict.REFUTED in (self, other):
            return Verdict.REFUTED
        if Verdict.UNDECIDABLE in (self, other):
            return Verdict.UNDECIDABLE
        return Verdict.VERIFIED

    @classmethod
    def all(cls, verdicts) -> "Verdict":
        out = cls.VERIFIED
        for v in verdicts:
            out = out & v
        return out


@contextmanager
def precision(bits: int):
    """Run a block at ``bits`` of working precision."""
    with flint.ctx.workprec(bits):
        yield


def current_precision() -> int:
    return flint.ctx.prec


def env_precision(default: int = DEFAULT_PRECISION) -> int:
    """Working precision, overridable through ``THUEMORSE_PRECISION``."""
    raw = os.environ.get("THUEMORSE_PRECISION")
    return int(raw) if raw else default


def ball(value: Number, rad: Number = 0) -> arb:
    """Convert ``value`` to a ball at the current precision.

    Strings are parsed as decimals and enclosed, so ``ball("0.1")`` contains
    1/10 exactly.  Fractions are converted exactly when representable,
    otherwise enclosed.
    """
    if isinstance(value, arb):
        out = value
    elif isinstance(value, Fraction):
        out = arb(fmpq(value.numerator, value.denominator))
    elif isinstance(value, (fmpq, int, float, str)):
        out = arb(value)
    else:
        raise TypeError(f"cannot convert {type(value).__name__} to a ball")
    if rad:
        out = out + arb(0, rad)
    return out


def hull(lo: arb, hi: arb) -> arb:
    """Smallest ball containing both ``lo`` and ``hi``."""
    return lo.union(hi)


def sign(x: arb) -> int | None:
    """+1 or -1 when the ball excludes zero, ``None`` otherwise."""
    if x > 0:
        return 1
    if x < 0:
        return -1
    return None


def compare_le(a: arb, b: arb) -> Verdict:
    """Tri-state verdict for ``a <= b`` over all members of both balls."""
    if a <= b:
        return Verdict.VERIFIED
    if a > b:
        return Verdict.REFUTED
    return Verdict.UNDECIDABLE


def abs_ball(x: arb) -> arb:
    return abs(x)


def to_decimal(x: arb, digits: int = 30) -> dict:
    """Stable ``{"mid", "rad"}`` decimal rendering of a ball."""
    mid = x.mid()
    return {
        "mid": mid.str(digits, radius=False, more=True),
        "rad": x.rad().str(3, radius=False, more=True),
    }


def ball_str(x: arb, digits: int = 20) -> str:
    return x.str(digits, radius=True)


def retry(fn: Callable[[int], T], start: int = DEFAULT_PRECISION,
          max_bits: int = MAX_PRECISION,
          undecided: Callable[[T], bool] | None = None) -> T:
    """Call ``fn(bits)`` under doubling precision until it decides.

    ``fn`` runs inside the matching precision context.  A run counts as
    undecided when it raises :class:`Undecidable` or when ``undecided``
    returns true on its result.  The last result (or exception) at
    ``max_bits`` is returned (or re-raised).
    """
    bits = start
    while True:
        try:
            with precision(bits):
                result = fn(bits)
        except Undecidable:
            if bits >= max_bits:
                raise
        else:
            if undecided is None or not undecided(result) or bits >= max_bits:
                return result
        bits = min(2 * bits, max_bits)
