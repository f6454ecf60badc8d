"""Rendering numeric values into token surface forms, and parsing them back.

Four surface forms are supported: plain digits ("75"), single-word English
("seventy-five", integers 0-99 only), one-decimal floats ("75.1"), and
signed digits ("-75").  Values are carried as exact integers (tenths for the
float form) so rendering never touches binary floating point.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass


class FormatRangeError(ValueError):
    """Value falls outside the domain of the requested surface format."""


class ParseError(ValueError):
    """Surface string could not have been produced by ``render``."""


class NumberFormat(enum.Enum):
    DIGITS = "digits"
    WORDS = "words"
    FLOAT1 = "float1"
    NEGATIVE_DIGITS = "negative_digits"


_ONES = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
]
_TENS = ["twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"]

_DIGITS_RE = re.compile(r"^(0|[1-9][0-9]*)$")
_NEG_DIGITS_RE = re.compile(r"^-?(0|[1-9][0-9]*)$")
_FLOAT1_RE = re.compile(r"^(0|[1-9][0-9]*)\.([0-9])$")


def _int_to_words(v: int) -> str:
    if v < 20:
        return _ONES[v]
    tens, ones = divmod(v, 10)
    if ones == 0:
        return _TENS[tens - 2]
    return f"{_TENS[tens - 2]}-{_ONES[ones]}"


def render(value: int, fmt: NumberFormat) -> str:
    """Render an exact integer value (tenths for FLOAT1) to its surface form."""
    if not isinstance(value, (int,)) or isinstance(value, bool):
        raise FormatRangeError(f"value must be an integer, got {value!r}")
    if fmt is NumberFormat.DIGITS:
        if value < 0:
            raise FormatRangeError(f"digits format requires value >= 0, got {value}")
        return str(value)
    if fmt is NumberFormat.NEGATIVE_DIGITS:
        return str(value)
    if fmt is NumberFormat.WORDS:
        if not 0 <= value <= 99:
            raise FormatRangeError(f"word form requires 0 <= value <= 99, got {value}")
        return _int_to_words(value)
    if fmt is NumberFormat.FLOAT1:
        if value < 0:
            raise FormatRangeError(f"float form requires tenths >= 0, got {value}")
        whole, tenth = divmod(value, 10)
        return f"{whole}.{tenth}"
    raise FormatRangeError(f"unknown format {fmt!r}")


_WORDS_TABLE = {_int_to_words(v): v for v in range(100)}


def parse(surface: str, fmt: NumberFormat) -> int:
    """Inverse of :func:`render`; the round-trip oracle used by the tests."""
    if fmt is NumberFormat.DIGITS:
        if not _DIGITS_RE.match(surface):
            raise ParseError(f"not a canonical digit string: {surface!r}")
        return int(surface)
    if fmt is NumberFormat.NEGATIVE_DIGITS:
        if not _NEG_DIGITS_RE.match(surface) or surface == "-0":
            raise ParseError(f"not a canonical signed digit string: {surface!r}")
        return int(surface)
    if fmt is NumberFormat.WORDS:
        try:
            return _WORDS_TABLE[surface]
        except KeyError:
            raise ParseError(f"not a single-word numeral: {surface!r}") from None
    if fmt is NumberFormat.FLOAT1:
        m = _FLOAT1_RE.match(surface)
        if not m:
            raise ParseError(f"not a one-decimal float string: {surface!r}")
        return int(m.group(1)) * 10 + int(m.group(2))
    raise ParseError(f"unknown format {fmt!r}")


@dataclass(frozen=True)
class NumberToken:
    """A numeric value paired with its rendered surface form.

    ``value`` is exact: the integer itself, or integer tenths for FLOAT1.
    Construct through :func:`make_token` so surface and value always agree.
    """

    value: int
    surface: str
    fmt: NumberFormat

    @property
    def real(self) -> float:
        """The token's numeric value as a machine float (probe-target time)."""
        if self.fmt is NumberFormat.FLOAT1:
            return self.value / 10.0
        return float(self.value)


def make_token(value: int, fmt: NumberFormat) -> NumberToken:
    return NumberToken(value=value, surface=render(value, fmt), fmt=fmt)
