"""Pool splits and synthetic dataset generators."""

import numpy as np
import pytest

from numprobe.numeral import NumberFormat, parse
from numprobe.taskgen import (
    LIST_LEN,
    PoolTooSmall,
    dump_dataset,
    gen_add,
    gen_decode,
    gen_listmax,
    gen_listmax_float,
    make_split,
)


def test_split_is_deterministic():
    a = make_split(0, 99, seed=7)
    b = make_split(0, 99, seed=7)
    assert a.train_pool == b.train_pool and a.test_pool == b.test_pool


def test_split_differs_across_seeds():
    assert make_split(0, 99, 1).train_pool != make_split(0, 99, 2).train_pool


def test_split_fractions():
    s = make_split(0, 99, seed=3)
    assert len(s.train_pool) == 80 and len(s.test_pool) == 20


def test_split_fuzz_disjoint_and_covering():
    # 1000 random (range, seed) configs: pools partition the range exactly
    rng = np.random.Generator(np.random.PCG64(123))
    for _ in range(1000):
        lo = int(rng.integers(-50, 500))
        hi = lo + int(rng.integers(0, 400))
        seed = int(rng.integers(0, 2**31))
        s = make_split(lo, hi, seed)
        train, test = set(s.train_pool), set(s.test_pool)
        assert not train & test
        assert train | test == set(range(lo, hi + 1))
        assert len(s.train_pool) == round(0.8 * (hi - lo + 1))


def test_degenerate_split_flagged():
    s = make_split(5, 5, seed=0)
    assert s.train_pool == (5,) and s.test_pool == ()
    assert s.degenerate


def test_empty_range_rejected():
    with pytest.raises(ValueError):
        make_split(3, 2, seed=0)


def test_listmax_labels_match_brute_force():
    s = make_split(0, 999, seed=1)
    for pool in (s.train_pool, s.test_pool):
        instances = gen_listmax(pool, 5000, 1000, NumberFormat.DIGITS, seed=11)
        for inst in instances:
            values = [t.real for t in inst.tokens]
            assert inst.label == int(np.argmax(values))
            assert len(set(values)) == LIST_LEN


def test_listmax_values_stay_in_pool():
    s = make_split(0, 99, seed=4)
    pool = set(s.test_pool)
    for inst in gen_listmax(s.test_pool, 2000, 100, NumberFormat.DIGITS, seed=5):
        assert all(t.value in pool for t in inst.tokens)


def test_listmax_lists_are_local():
    # mean within-list spread stays well under the range size
    s = make_split(0, 999, seed=2)
    instances = gen_listmax(s.train_pool, 3000, 1000, NumberFormat.DIGITS, seed=9)
    spreads = [max(t.real for t in i.tokens) - min(t.real for t in i.tokens)
               for i in instances]
    assert np.mean(spreads) < 0.5 * 1000


def test_listmax_labels_are_position_balanced():
    s = make_split(0, 99, seed=6)
    instances = gen_listmax(s.test_pool, 5000, 100, NumberFormat.DIGITS, seed=7)
    counts = np.bincount([i.label for i in instances], minlength=LIST_LEN)
    assert counts.min() > 0.5 * counts.max()


def test_listmax_minimum_pool_yields_whole_pool():
    pool = (3, 10, 55, 70, 98)
    for inst in gen_listmax(pool, 200, 100, NumberFormat.DIGITS, seed=1):
        assert sorted(t.value for t in inst.tokens) == sorted(pool)


def test_listmax_pool_too_small():
    with pytest.raises(PoolTooSmall):
        gen_listmax((1, 2, 3, 4), 10, 100, NumberFormat.DIGITS, seed=0)


def test_listmax_deterministic():
    pool = make_split(0, 99, 1).train_pool
    a = gen_listmax(pool, 500, 100, NumberFormat.DIGITS, seed=42)
    b = gen_listmax(pool, 500, 100, NumberFormat.DIGITS, seed=42)
    assert [(tuple(t.surface for t in x.tokens), x.label) for x in a] == \
           [(tuple(t.surface for t in y.tokens), y.label) for y in b]


def test_listmax_float_half_share_base_integer():
    instances = gen_listmax_float(tuple(range(80)), 2000, seed=3)
    for inst in instances:
        tenths = [t.value for t in inst.tokens]
        assert len(set(tenths)) == LIST_LEN
        assert inst.label == int(np.argmax(tenths))
    shared = sum(1 for i in instances
                 if len({t.value // 10 for t in i.tokens}) == 1)
    assert 0.35 < shared / len(instances) < 0.65


def test_gen_decode_one_instance_per_value():
    pool = (3, 7, 21)
    out = gen_decode(pool, NumberFormat.DIGITS)
    assert [(i.token.surface, i.target) for i in out] == \
           [("3", 3.0), ("7", 7.0), ("21", 21.0)]


def test_gen_add_all_ordered_pairs():
    pool = (1, 2, 5)
    out = gen_add(pool, NumberFormat.DIGITS, seed=0)
    assert len(out) == 9
    assert {(i.token_a.value, i.token_b.value) for i in out} == \
           {(a, b) for a in pool for b in pool}
    assert all(i.target == i.token_a.real + i.token_b.real for i in out)


def test_gen_add_subsample():
    pool = tuple(range(40))
    out = gen_add(pool, NumberFormat.DIGITS, seed=1, subsample_frac=0.1)
    assert len(out) == 160
    a = gen_add(pool, NumberFormat.DIGITS, seed=1, subsample_frac=0.1)
    assert [(i.token_a.value, i.token_b.value) for i in out] == \
           [(i.token_a.value, i.token_b.value) for i in a]


def test_dump_dataset_round_trips_surfaces(tmp_path):
    s = make_split(0, 99, seed=1)
    instances = gen_listmax(s.train_pool, 50, 100, NumberFormat.WORDS, seed=2)
    path = tmp_path / "listmax.tsv"
    dump_dataset(instances, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 50
    for line, inst in zip(lines, instances):
        fields = line.split("\t")
        assert len(fields) == LIST_LEN + 1
        assert int(fields[-1]) == inst.label
        values = [parse(f, NumberFormat.WORDS) for f in fields[:-1]]
        assert values == [t.value for t in inst.tokens]
