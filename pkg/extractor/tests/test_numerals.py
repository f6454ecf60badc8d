"""Cross-check the local surface renderer against the golden list exported
from the probing harness."""

import os

import pytest

from numprobe_extract.numerals import DomainError, render, surfaces_for_range

GOLDEN = os.path.join(os.path.dirname(__file__), "data", "golden_surfaces.tsv")


def golden_rows():
    with open(GOLDEN, encoding="utf-8") as f:
        for line in f:
            fmt, value, surface = line.rstrip("\n").split("\t")
            yield fmt, int(value), surface


def test_matches_golden_list():
    rows = list(golden_rows())
    assert len(rows) > 2000
    for fmt, value, surface in rows:
        assert render(value, fmt) == surface, (fmt, value)


def test_domain_errors():
    with pytest.raises(DomainError):
        render(-1, "digits")
    with pytest.raises(DomainError):
        render(100, "words")
    with pytest.raises(DomainError):
        render(0, "roman")


def test_surfaces_for_range():
    assert surfaces_for_range(0, 99, "digits") == [str(v) for v in range(100)]
    assert len(surfaces_for_range(0, 9, "float1")) == 100
    assert surfaces_for_range(0, 0, "float1")[:2] == ["0.0", "0.1"]
    with pytest.raises(DomainError):
        surfaces_for_range(5, 4, "digits")
