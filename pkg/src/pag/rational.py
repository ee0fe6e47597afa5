"""Exact rational parsing and formatting.

Every quantity in the game (powers, allocations, pairwise utilities) is a
:class:`fractions.Fraction`. Inputs arrive as integers, decimal strings
(``"2.5"``) or ``"num/den"`` strings; floats are refused because they would
silently round.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import lcm
from typing import Iterable, Union

RationalLike = Union[int, str, Fraction]

_RATIONAL_RE = re.compile(r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)(\s*/\s*\d+)?\s*$")


def parse_rational(value: RationalLike) -> Fraction:
    """Parse an exact rational from an int, a Fraction or a string."""
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if not _RATIONAL_RE.match(value):
            raise ValueError(f"not a rational: {value!r}")
        try:
            return Fraction(value.replace(" ", ""))
        except ZeroDivisionError:
            raise ValueError(f"zero denominator: {value!r}") from None
    raise ValueError(f"not a rational (floats are rejected): {value!r}")


def format_rational(value: Fraction) -> str:
    """Canonical ``"num/den"`` string; integers keep the ``/1``."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def common_denominator(values: Iterable[Fraction]) -> int:
    """Least common multiple of the denominators of ``values`` (1 if empty)."""
    d = 1
    for v in values:
        d = lcm(d, Fraction(v).denominator)
    return d
