"""Numeracy probing harness: synthetic list-max / decoding / addition tasks
trained on top of interchangeable number-token embeddings."""

__version__ = "0.1.0"

from .numeral import NumberFormat, NumberToken, render, parse

__all__ = ["NumberFormat", "NumberToken", "render", "parse", "__version__"]
