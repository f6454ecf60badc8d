"""Embedding providers: frozen vector tables (loaded or random), the value
embedding, and character-level CNN/LSTM encoders (trainable or frozen at
initialization).

Every provider maps a batch of NumberTokens to an (N, dim) float64 array via
``forward`` and routes gradients back through ``backward`` when trainable.
Frozen providers are pure lookups with no trainable parameters.
"""

from __future__ import annotations

import math

import numpy as np

from .neural import kernels
from .neural.params import ParamStore, xavier_uniform
from .numeral import NumberToken

PAD_CHAR = "∅"  # ∅, never occurs in a rendered surface
CHAR_VOCAB = [PAD_CHAR] + list("0123456789") + [chr(c) for c in range(ord("a"), ord("z") + 1)] + ["-", "."]
CHAR_INDEX = {c: i for i, c in enumerate(CHAR_VOCAB)}

CNN_WIDTHS = tuple(range(1, 8))
# per-width filter counts; wide (place-value-preserving) windows dominate
CNN_FILTERS = (8, 8, 16, 32, 64, 128, 256)
# fraction of nonzero entries in each conv filter at initialization
CNN_FILTER_DENSITY = 0.05
CHAR_EMBED_DIM = 20
CHAR_LSTM_HIDDEN = 64


class BadVectorFile(ValueError):
    pass


class DimMismatch(ValueError):
    pass


class UnknownChar(ValueError):
    pass


class CoverageError(RuntimeError):
    """A token in the experiment set is not embeddable by the provider."""


class TableProvider:
    """Frozen surface -> vector lookup table."""

    trainable = False
    store = None

    def __init__(self, entries: dict, dim: int, source: str):
        self.entries = entries
        self.dim = dim
        self.source = source

    def covers(self, token: NumberToken) -> bool:
        return token.surface in self.entries

    def forward(self, tokens):
        try:
            out = np.stack([self.entries[t.surface] for t in tokens])
        except KeyError as e:
            raise CoverageError(f"surface {e.args[0]!r} not in table") from None
        return out, None

    def backward(self, cache, d_out):
        return None


def load_table(path, expected_dim=None) -> TableProvider:
    """Load a text vector file: `surface f1 f2 ... fd` per line, optional
    `count dim` header (auto-detected as a first line of exactly two ints)."""
    entries = {}
    dim = None
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    start = 0
    if lines:
        head = lines[0].split()
        if len(head) == 2 and all(_is_int(tok) for tok in head):
            start = 1
    for ln, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        parts = line.split()
        surface, fields = parts[0], parts[1:]
        try:
            vec = np.array([float(x) for x in fields])
        except ValueError:
            raise BadVectorFile(f"{path}:{ln}: non-numeric field") from None
        if dim is None:
            if len(vec) == 0:
                raise BadVectorFile(f"{path}:{ln}: no vector components")
            dim = len(vec)
        elif len(vec) != dim:
            raise BadVectorFile(f"{path}:{ln}: expected {dim} components, got {len(vec)}")
        entries[surface] = vec
    if dim is None:
        raise BadVectorFile(f"{path}: no vector entries")
    if expected_dim is not None and dim != expected_dim:
        raise DimMismatch(f"{path}: dimension {dim}, expected {expected_dim}")
    return TableProvider(entries, dim, source="file")


def _is_int(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False


def random_table(surfaces, dim: int, seed: int) -> TableProvider:
    """i.i.d. Gaussian vectors (std 1/sqrt(dim), so norms are near 1)."""
    if dim <= 0:
        raise ValueError("dim must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    entries = {s: rng.normal(0.0, 1.0 / math.sqrt(dim), size=dim) for s in sorted(set(surfaces))}
    return TableProvider(entries, dim, source="random")


class ValueProvider:
    """One-dimensional embedding equal to (a signed log of) the value itself."""

    trainable = False
    store = None
    dim = 1

    def __init__(self, log_scale: bool = True):
        self.log_scale = log_scale

    def covers(self, token: NumberToken) -> bool:
        return True

    def embed_value(self, v: float) -> float:
        if self.log_scale:
            return math.copysign(math.log10(1.0 + abs(v)), v)
        return v

    def forward(self, tokens):
        return np.array([[self.embed_value(t.real)] for t in tokens]), None

    def backward(self, cache, d_out):
        return None


def _surface_indices(surfaces, min_len: int) -> np.ndarray:
    """Left-pad surfaces to max(min_len, longest) and map chars to indices."""
    L = max(min_len, max(len(s) for s in surfaces))
    idx = np.zeros((len(surfaces), L), dtype=np.int64)
    for i, s in enumerate(surfaces):
        for j, ch in enumerate(s):
            k = CHAR_INDEX.get(ch)
            if k is None:
                raise UnknownChar(f"character {ch!r} in surface {s!r}")
            idx[i, L - len(s) + j] = k
    return idx


class CharCNNEncoder:
    """Character-level CNN: widths 1-7, ReLU, max-pool, concatenated.

    Surfaces are left-padded so digits at the same place value align across
    tokens of equal length.  ``filters`` is either one count shared by every
    width or a per-width sequence; the default allocation grows with the
    width, so most features come from wide windows that span the whole
    padded surface and preserve each character's place value.
    """

    def __init__(self, seed: int, trainable: bool = True,
                 char_dim: int = CHAR_EMBED_DIM, filters=CNN_FILTERS,
                 widths=CNN_WIDTHS, filter_density: float = CNN_FILTER_DENSITY):
        if not 0.0 < filter_density <= 1.0:
            raise ValueError("filter_density must be in (0, 1]")
        self.trainable = trainable
        self.widths = tuple(widths)
        if isinstance(filters, int):
            filters = (filters,) * len(self.widths)
        self.filters = tuple(filters)
        if len(self.filters) != len(self.widths):
            raise ValueError("need one filter count per width")
        self.dim = sum(self.filters)
        rng = np.random.Generator(np.random.PCG64(seed))
        self.store = ParamStore()
        E0 = xavier_uniform(rng, (len(CHAR_VOCAB), char_dim))
        E0[0, :] = 0.0  # pad embeds to zero so pad-only windows stay silent
        self.E = self.store.add("enc.chars", E0)
        self.conv_W = {}
        self.conv_b = {}
        for w, f in zip(self.widths, self.filters):
            W0 = xavier_uniform(rng, (w * char_dim, f))
            if filter_density < 1.0:
                # Sparse filters respond to one or two characters instead of
                # mixing every window position through the max-pool; that
                # keeps individual digits recoverable from the pooled
                # features, which dense random filters entangle beyond what
                # a probe can invert from a small training pool.
                W0 *= (rng.random(size=W0.shape) < filter_density) / math.sqrt(filter_density)
            self.conv_W[w] = self.store.add(f"enc.conv{w}.W", W0)
            self.conv_b[w] = self.store.add(f"enc.conv{w}.b", np.zeros(f))

    def covers(self, token: NumberToken) -> bool:
        return all(c in CHAR_INDEX for c in token.surface)

    def forward(self, tokens):
        surfaces = [t.surface for t in tokens]
        try:
            idx = _surface_indices(surfaces, min_len=max(self.widths))
        except UnknownChar as e:
            raise CoverageError(str(e)) from None
        emb = self.E[idx]
        outs = []
        caches = []
        for w in self.widths:
            out, am = kernels.conv_relu_maxpool_forward(emb, self.conv_W[w], self.conv_b[w], w)
            outs.append(out)
            caches.append((out, am))
        return np.concatenate(outs, axis=1), (idx, emb, caches)

    def backward(self, cache, d_out):
        idx, emb, caches = cache
        d_emb = np.zeros_like(emb)
        offset = 0
        for k, w in enumerate(self.widths):
            sl = d_out[:, offset : offset + self.filters[k]]
            offset += self.filters[k]
            out, am = caches[k]
            de, dW, db = kernels.conv_relu_maxpool_backward(
                emb, self.conv_W[w], out, am, np.ascontiguousarray(sl), w
            )
            d_emb += de
            self.store.grads[f"enc.conv{w}.W"] += dW
            self.store.grads[f"enc.conv{w}.b"] += db
        np.add.at(self.store.grads["enc.chars"], idx, d_emb)
        self.store.grads["enc.chars"][0, :] = 0.0  # pad row stays zero
        return None


class CharLSTMEncoder:
    """Character-level LSTM; the final hidden state is the token vector."""

    def __init__(self, seed: int, trainable: bool = True,
                 char_dim: int = CHAR_EMBED_DIM, hidden: int = CHAR_LSTM_HIDDEN):
        self.trainable = trainable
        self.dim = hidden
        rng = np.random.Generator(np.random.PCG64(seed))
        self.store = ParamStore()
        E0 = xavier_uniform(rng, (len(CHAR_VOCAB), char_dim))
        E0[0, :] = 0.0
        self.E = self.store.add("enc.chars", E0)
        from .neural.layers import LstmLayer

        self.lstm = LstmLayer(self.store, "enc.lstm", char_dim, hidden, rng)

    def covers(self, token: NumberToken) -> bool:
        return all(c in CHAR_INDEX for c in token.surface)

    def forward(self, tokens):
        surfaces = [t.surface for t in tokens]
        try:
            idx = _surface_indices(surfaces, min_len=1)
        except UnknownChar as e:
            raise CoverageError(str(e)) from None
        emb = self.E[idx]
        h_all, lstm_cache = self.lstm.forward(emb)
        return h_all[:, -1].copy(), (idx, emb, h_all.shape, lstm_cache)

    def backward(self, cache, d_out):
        idx, emb, h_shape, lstm_cache = cache
        d_h_all = np.zeros(h_shape)
        d_h_all[:, -1] = d_out
        d_emb = self.lstm.backward(lstm_cache, d_h_all)
        np.add.at(self.store.grads["enc.chars"], idx, d_emb)
        self.store.grads["enc.chars"][0, :] = 0.0
        return None


def validate_coverage(provider, tokens) -> list:
    """Missing surfaces (empty list means every token is embeddable)."""
    missing = []
    seen = set()
    for t in tokens:
        if t.surface in seen:
            continue
        seen.add(t.surface)
        if not provider.covers(t):
            missing.append(t.surface)
    return missing
