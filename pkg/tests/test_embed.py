"""Embedding providers: vector files, random/value tables, char encoders."""

import math

import numpy as np
import pytest

from numprobe.embed import (
    BadVectorFile,
    CharCNNEncoder,
    CharLSTMEncoder,
    CoverageError,
    DimMismatch,
    ValueProvider,
    load_table,
    random_table,
    validate_coverage,
)
from numprobe.numeral import NumberFormat, make_token


def toks(values, fmt=NumberFormat.DIGITS):
    return [make_token(v, fmt) for v in values]


def test_load_table_plain(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("7 1.0 2.0 3.0\n42 -1.0 0.5 0.25\n")
    t = load_table(p)
    assert t.dim == 3
    emb, _ = t.forward(toks([42]))
    assert np.allclose(emb, [[-1.0, 0.5, 0.25]])


def test_load_table_with_count_header(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("2 3\n7 1 2 3\n8 4 5 6\n")
    t = load_table(p)
    assert t.dim == 3 and set(t.entries) == {"7", "8"}


def test_load_table_rejects_ragged_rows(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("7 1 2 3\n8 4 5\n")
    with pytest.raises(BadVectorFile):
        load_table(p)


def test_load_table_rejects_non_numeric(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("7 1 x 3\n")
    with pytest.raises(BadVectorFile):
        load_table(p)


def test_load_table_rejects_empty(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("")
    with pytest.raises(BadVectorFile):
        load_table(p)


def test_load_table_dim_mismatch(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("7 1 2 3\n")
    with pytest.raises(DimMismatch):
        load_table(p, expected_dim=300)


def test_missing_surface_raises_coverage_error(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("7 1 2 3\n")
    t = load_table(p)
    assert validate_coverage(t, toks([7, 8])) == ["8"]
    with pytest.raises(CoverageError):
        t.forward(toks([8]))


def test_random_table_deterministic_and_scaled():
    surfaces = [str(v) for v in range(100)]
    a = random_table(surfaces, dim=300, seed=5)
    b = random_table(surfaces, dim=300, seed=5)
    for s in surfaces:
        assert np.array_equal(a.entries[s], b.entries[s])
    norms = [np.linalg.norm(v) for v in a.entries.values()]
    assert 0.8 < np.mean(norms) < 1.2  # std 1/sqrt(dim) puts norms near 1
    assert not np.array_equal(a.entries["7"],
                              random_table(surfaces, 300, seed=6).entries["7"])


def test_value_provider_log_scale():
    v = ValueProvider()
    emb, _ = v.forward(toks([0, 9, 99]))
    assert emb.shape == (3, 1)
    assert emb[0, 0] == 0.0
    assert emb[1, 0] == pytest.approx(1.0)
    assert emb[2, 0] == pytest.approx(2.0)
    neg = make_token(-9, NumberFormat.NEGATIVE_DIGITS)
    assert ValueProvider().forward([neg])[0][0, 0] == pytest.approx(-1.0)
    raw = ValueProvider(log_scale=False)
    assert raw.forward(toks([42]))[0][0, 0] == 42.0


@pytest.mark.parametrize("enc_cls", [CharCNNEncoder, CharLSTMEncoder])
def test_char_encoders_deterministic(enc_cls):
    tokens = toks([3, 57, 998])
    a, _ = enc_cls(seed=9, trainable=False).forward(tokens)
    b, _ = enc_cls(seed=9, trainable=False).forward(tokens)
    assert np.array_equal(a, b)
    c, _ = enc_cls(seed=10, trainable=False).forward(tokens)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("enc_cls", [CharCNNEncoder, CharLSTMEncoder])
def test_char_encoders_cover_all_formats(enc_cls):
    enc = enc_cls(seed=0)
    tokens = (toks([0, 9999]) + toks([0, 99], NumberFormat.WORDS)
              + toks([751], NumberFormat.FLOAT1)
              + toks([-12], NumberFormat.NEGATIVE_DIGITS))
    assert validate_coverage(enc, tokens) == []
    emb, _ = enc.forward(tokens)
    assert emb.shape == (len(tokens), enc.dim)
    assert np.all(np.isfinite(emb))


def test_char_cnn_dim_is_filter_sum():
    enc = CharCNNEncoder(seed=0, filters=(2, 3, 4), widths=(1, 2, 3))
    assert enc.dim == 9
    assert CharCNNEncoder(seed=0, filters=6, widths=(1, 2)).dim == 12


def test_char_cnn_filter_count_mismatch_rejected():
    with pytest.raises(ValueError):
        CharCNNEncoder(seed=0, filters=(2, 3), widths=(1, 2, 3))
    with pytest.raises(ValueError):
        CharCNNEncoder(seed=0, filter_density=0.0)


def test_char_cnn_padding_is_silent():
    # a surface shorter than the widest filter embeds identically whether the
    # batch contains longer surfaces or not (left-padding with a zero row)
    enc = CharCNNEncoder(seed=3, trainable=False)
    alone, _ = enc.forward(toks([7]))
    batched, _ = enc.forward(toks([7, 123456]))
    assert np.allclose(alone[0], batched[0])


def test_pad_embedding_row_stays_zero_under_training():
    enc = CharCNNEncoder(seed=1, trainable=True, char_dim=4,
                         filters=2, widths=(1, 2))
    assert np.array_equal(enc.E[0], np.zeros(4))
    tokens = toks([12, 34])
    out, cache = enc.forward(tokens)
    enc.backward(cache, np.ones_like(out))
    assert np.array_equal(enc.store.grads["enc.chars"][0], np.zeros(4))
