"""Exact decimal arithmetic for timestamps and durations.

All times, durations and function values are fractions.Fraction so that
epsilon-separated timestamps like 2.000 + 5.000 - 4.001 = 2.999 are exact.
Only finite decimal literals are accepted from input text, which keeps every
derived quantity a finite decimal as well.
"""

from __future__ import annotations

import re
from fractions import Fraction

# minimum separation between mutually interfering happenings
EPSILON = Fraction(1, 1000)

# tolerance for numeric comparisons (costs, durations)
TOLERANCE = Fraction(1, 10**6)

_DECIMAL_RE = re.compile(r"^[+-]?(?:\d+(?:\.\d+)?|\.\d+)$")


def parse_decimal(text: str) -> Fraction:
    """Parse a decimal literal exactly. Rejects anything but plain decimals."""
    if not _DECIMAL_RE.match(text):
        raise ValueError(f"not a decimal number: {text!r}")
    return Fraction(text)


def is_decimal(value: Fraction) -> bool:
    """True when value has a finite decimal expansion (denominator 2^a * 5^b)."""
    den = value.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    return den == 1


def format_decimal(value: Fraction) -> str:
    """Shortest exact decimal form: 4 -> "4", 2.999 -> "2.999"."""
    if value.denominator == 1:
        return str(value.numerator)
    return _expand(value, min_places=1)


def format_time(value: Fraction) -> str:
    """Plan-file time form, at least three decimal places: 3 -> "3.000"."""
    return _expand(value, min_places=3)


def _expand(value: Fraction, min_places: int) -> str:
    if not is_decimal(value):
        # cannot happen for values built from parsed decimals; fail loudly
        raise ValueError(f"value has no finite decimal expansion: {value}")
    sign = "-" if value < 0 else ""
    value = abs(value)
    den = value.denominator
    places = 0
    while den % 2 == 0:
        den //= 2
        places += 1
    twos = places
    fives = 0
    while den % 5 == 0:
        den //= 5
        fives += 1
    places = max(twos, fives, min_places)
    scaled = value.numerator * 10**places // value.denominator
    digits = str(scaled).rjust(places + 1, "0")
    whole, frac = digits[:-places], digits[-places:]
    return f"{sign}{whole}.{frac}"


def close_enough(a: Fraction, b: Fraction, tol: Fraction = TOLERANCE) -> bool:
    return abs(a - b) <= tol
