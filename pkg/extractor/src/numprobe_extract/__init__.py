"""Export number-token vectors from pretrained resources to the text
vector-file format consumed by the probing harness."""

__version__ = "0.1.0"
