"""Number surface rendering, re-implemented locally.

This package deliberately does not import the probing harness; the surface
rules are written out again here and the test suite cross-checks them
against a golden list exported from the harness, so the two stay in sync
through data rather than a code dependency.
"""

from __future__ import annotations

FORMATS = ("digits", "words", "float1", "negative_digits")

_ONES = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
]
_TENS = ["twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"]


class DomainError(ValueError):
    """Value is outside the domain of the requested surface format."""


def render(value: int, fmt: str) -> str:
    """Surface string for an exact integer value (tenths for float1)."""
    if fmt == "digits":
        if value < 0:
            raise DomainError(f"digits format requires value >= 0, got {value}")
        return str(value)
    if fmt == "negative_digits":
        return str(value)
    if fmt == "words":
        if not 0 <= value <= 99:
            raise DomainError(f"word form requires 0 <= value <= 99, got {value}")
        if value < 20:
            return _ONES[value]
        tens, ones = divmod(value, 10)
        if ones == 0:
            return _TENS[tens - 2]
        return f"{_TENS[tens - 2]}-{_ONES[ones]}"
    if fmt == "float1":
        if value < 0:
            raise DomainError(f"float form requires tenths >= 0, got {value}")
        whole, tenth = divmod(value, 10)
        return f"{whole}.{tenth}"
    raise DomainError(f"unknown format {fmt!r}")


def surfaces_for_range(lo: int, hi: int, fmt: str) -> list:
    """Surfaces for every integer in [lo, hi] (ten tenths each for float1)."""
    if hi < lo:
        raise DomainError(f"empty range [{lo}, {hi}]")
    out = []
    for v in range(lo, hi + 1):
        if fmt == "float1":
            out.extend(render(10 * v + d, fmt) for d in range(10))
        else:
            out.append(render(v, fmt))
    return out
