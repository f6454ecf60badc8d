"""Train/test pools and synthetic dataset generation for the three probing
tasks (list maximum, decoding, addition).

All randomness flows through seeded PCG64 generators so the same (seed,
config) pair reproduces a dataset byte for byte on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numeral import NumberFormat, NumberToken, make_token

TRAIN_FRACTION = 0.8
LIST_LEN = 5
DEFAULT_N_TRAIN = 100_000
DEFAULT_N_TEST = 10_000
# Gaussian variance is this fraction of the range size (not the std).  The
# factor must keep lists local (mean spread well under the range) while
# exceeding the spacing of the sparsest pool in play: the 20% test pool is 4x
# sparser than the train pool, and if training lists never span a test-pool
# gap the probe is never taught the comparisons the test lists require.
SPREAD_VARIANCE_FACTOR = 0.5
# pair subsampling kicks in above this range size
SUBSAMPLE_RANGE_THRESHOLD = 100
SUBSAMPLE_FRACTION = 0.1

_MAX_GAUSSIAN_RETRIES = 64


class PoolTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class PoolSplit:
    """An 80/20 shuffle-split of the integers in [range_lo, range_hi]."""

    range_lo: int
    range_hi: int
    train_pool: tuple
    test_pool: tuple
    seed: int
    degenerate: bool = False

    @property
    def range_size(self) -> int:
        return self.range_hi - self.range_lo + 1


@dataclass(frozen=True)
class ListMaxInstance:
    tokens: tuple  # LIST_LEN NumberTokens
    label: int  # argmax index


@dataclass(frozen=True)
class DecodeInstance:
    token: NumberToken
    target: float


@dataclass(frozen=True)
class AddInstance:
    token_a: NumberToken
    token_b: NumberToken
    target: float


def make_split(range_lo: int, range_hi: int, seed: int) -> PoolSplit:
    """Shuffle the integers in [lo, hi] and put the first 80% into train."""
    if range_hi < range_lo:
        raise ValueError(f"empty range [{range_lo}, {range_hi}]")
    values = np.arange(range_lo, range_hi + 1, dtype=np.int64)
    rng = np.random.Generator(np.random.PCG64(seed))
    rng.shuffle(values)
    n_train = round(TRAIN_FRACTION * len(values))
    train = tuple(sorted(int(v) for v in values[:n_train]))
    test = tuple(sorted(int(v) for v in values[n_train:]))
    return PoolSplit(
        range_lo=range_lo,
        range_hi=range_hi,
        train_pool=train,
        test_pool=test,
        seed=seed,
        degenerate=len(test) == 0,
    )


def _nearest_pool_index(pool_sorted: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Index of the pool value nearest to each x; ties go to the smaller value."""
    hi = np.searchsorted(pool_sorted, x, side="left")
    hi = np.clip(hi, 0, len(pool_sorted) - 1)
    lo = np.clip(hi - 1, 0, len(pool_sorted) - 1)
    d_lo = np.abs(x - pool_sorted[lo])
    d_hi = np.abs(pool_sorted[hi] - x)
    return np.where(d_lo <= d_hi, lo, hi)


def _duplicate_mask(values: np.ndarray) -> np.ndarray:
    """Boolean mask of slots equal to an earlier slot in the same row."""
    eq = values[:, :, None] == values[:, None, :]
    return np.tril(eq, -1).any(axis=2)


def _dedup(values, bases, pool_sorted, sigma, rng) -> None:
    """Resample duplicate slots (in place) until each row is distinct.

    Duplicates are redrawn from the base-centered Gaussian in vectorized
    rounds.  On sparse pools (e.g. a 20% test pool) the nominal sigma rarely
    clears a collision, so it doubles every few rounds; slots still colliding
    after the retry budget fall back to the nearest still-unused pool value,
    which guarantees termination (a 5-value pool always yields the whole
    pool).
    """
    for attempt in range(_MAX_GAUSSIAN_RETRIES):
        bad = _duplicate_mask(values)
        if not bad.any():
            return
        centers = np.broadcast_to(bases[:, None], values.shape)[bad]
        widened = sigma * 2.0 ** (attempt // 8)
        draws = centers + rng.normal(0.0, widened, size=len(centers))
        values[bad] = pool_sorted[_nearest_pool_index(pool_sorted, draws)]
    for r in np.flatnonzero(_duplicate_mask(values).any(axis=1)):
        row = values[r]
        for i in range(len(row)):
            if row[i] in row[:i]:
                used = set(row[:i].tolist())
                unused = pool_sorted[~np.isin(pool_sorted, list(used))]
                row[i] = unused[np.argmin(np.abs(unused - row[i]))]


def gen_listmax(
    pool,
    n: int,
    range_size: int,
    fmt: NumberFormat,
    seed: int,
    variance_factor: float = SPREAD_VARIANCE_FACTOR,
) -> list:
    """Generate list-max instances by Gaussian sampling around a pool value.

    Each instance: draw a base value uniformly from the pool, add 5 zero-mean
    Gaussian offsets (variance = variance_factor * range_size), round each to
    the nearest pool value, and resample collisions until the 5 are distinct.
    """
    pool_sorted = np.array(sorted(pool), dtype=np.int64)
    if len(pool_sorted) < LIST_LEN:
        raise PoolTooSmall(f"need at least {LIST_LEN} pool values, got {len(pool_sorted)}")
    rng = np.random.Generator(np.random.PCG64(seed))
    sigma = math.sqrt(variance_factor * range_size)

    bases = pool_sorted[rng.integers(0, len(pool_sorted), size=n)]
    offsets = rng.normal(0.0, sigma, size=(n, LIST_LEN))
    raw = bases[:, None] + offsets
    values = pool_sorted[_nearest_pool_index(pool_sorted, raw.ravel()).reshape(n, LIST_LEN)]

    _dedup(values, bases, pool_sorted, sigma, rng)
    # dedup redraws later slots more often (and wider), so shuffle each row
    # to keep the argmax position uniform
    values = rng.permuted(values, axis=1)
    labels = np.argmax(values, axis=1)

    tok_cache = {}

    def tok(v):
        t = tok_cache.get(v)
        if t is None:
            t = tok_cache[v] = make_token(v, fmt)
        return t

    instances = []
    for i in range(n):
        tokens = tuple(tok(int(v)) for v in values[i])
        instances.append(ListMaxInstance(tokens=tokens, label=int(labels[i])))
    return instances


def gen_decode(pool, fmt: NumberFormat) -> list:
    """One decoding instance per pool value; no sampling."""
    out = []
    for v in sorted(pool):
        tok = make_token(int(v), fmt)
        out.append(DecodeInstance(token=tok, target=tok.real))
    return out


def gen_add(
    pool,
    fmt: NumberFormat,
    seed: int,
    subsample_frac: float = 1.0,
) -> list:
    """All ordered pairs from the pool, optionally subsampled uniformly."""
    values = sorted(int(v) for v in pool)
    if not values:
        return []
    n = len(values)
    total = n * n
    rng = np.random.Generator(np.random.PCG64(seed))
    if subsample_frac < 1.0:
        keep = rng.choice(total, size=round(subsample_frac * total), replace=False)
        keep.sort()
    else:
        keep = np.arange(total)
    toks = {v: make_token(v, fmt) for v in values}
    out = []
    for k in keep:
        ta, tb = toks[values[k // n]], toks[values[k % n]]
        out.append(AddInstance(token_a=ta, token_b=tb, target=ta.real + tb.real))
    return out


def gen_listmax_float(pool_ints, n: int, seed: int) -> list:
    """Float-form list-max instances over a pool of base integers.

    Half the lists reuse one base integer with 5 distinct decimal digits,
    half are 5 random integers each with a random decimal digit (distinctness
    enforced on the tenths values).
    """
    pool_sorted = np.array(sorted(pool_ints), dtype=np.int64)
    if len(pool_sorted) < LIST_LEN:
        raise PoolTooSmall(f"need at least {LIST_LEN} base integers, got {len(pool_sorted)}")
    rng = np.random.Generator(np.random.PCG64(seed))
    instances = []
    for _ in range(n):
        if rng.random() < 0.5:
            base = int(pool_sorted[rng.integers(0, len(pool_sorted))])
            digits = rng.choice(10, size=LIST_LEN, replace=False)
            tenths = [base * 10 + int(d) for d in digits]
        else:
            tenths = []
            while len(tenths) < LIST_LEN:
                v = int(pool_sorted[rng.integers(0, len(pool_sorted))]) * 10 + int(
                    rng.integers(0, 10)
                )
                if v not in tenths:
                    tenths.append(v)
        label = int(np.argmax(tenths))
        tokens = tuple(make_token(t, NumberFormat.FLOAT1) for t in tenths)
        instances.append(ListMaxInstance(tokens=tokens, label=label))
    return instances


def dump_dataset(instances, path) -> None:
    """Write one instance per line: tab-separated surfaces, then label/target."""
    with open(path, "w", encoding="utf-8") as f:
        for inst in instances:
            if isinstance(inst, ListMaxInstance):
                fields = [t.surface for t in inst.tokens] + [str(inst.label)]
            elif isinstance(inst, DecodeInstance):
                fields = [inst.token.surface, repr(inst.target)]
            elif isinstance(inst, AddInstance):
                fields = [inst.token_a.surface, inst.token_b.surface, repr(inst.target)]
            else:
                raise TypeError(f"unknown instance type {type(inst)!r}")
            f.write("\t".join(fields) + "\n")
