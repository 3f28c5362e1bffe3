"""Exact rational helpers and the ``"num/den"`` wire format."""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence

_RATIONAL = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rational(text) -> Fraction:
    """Parse ``"n"`` or ``"n/d"``. Decimals are rejected on purpose."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise TypeError(f"expected a 'num/den' string, got {type(text).__name__}")
    m = _RATIONAL.match(text)
    if not m:
        raise ValueError(f"not an exact rational (use 'num/den'): {text!r}")
    num, den = m.groups()
    if den is not None and int(den) == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def format_rational(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def as_vector(values: Iterable) -> tuple:
    return tuple(Fraction(v) for v in values)


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(u, v) if a and b), Fraction(0))


def lcm_of_denominators(values: Iterable[Fraction]) -> int:
    from math import lcm

    out = 1
    for v in values:
        out = lcm(out, Fraction(v).denominator)
    return out


def to_integer_row(values: Sequence) -> list:
    """Scale a rational row by the lcm of its denominators (positive factor)."""
    scale = lcm_of_denominators(values)
    return [int(Fraction(v) * scale) for v in values]


def primitive(values: Sequence[int]) -> tuple:
    from math import gcd

    g = 0
    for v in values:
        g = gcd(g, v)
    if g <= 1:
        return tuple(values)
    return tuple(v // g for v in values)
