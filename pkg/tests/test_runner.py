"""Experiment orchestration: configs, reports, determinism, failure isolation."""

import json

import numpy as np
import pytest
import yaml

from numprobe.numeral import NumberFormat
from numprobe.probe import TrainConfig
from numprobe.runner import (
    ConfigError,
    ExperimentConfig,
    aggregate_rows,
    config_from_dict,
    load_suite,
    read_rows_csv,
    run_experiment,
    run_suite,
    split_seed,
    write_rows_csv,
)


def quick_value_decode(**kw):
    args = dict(task="decode", fmt=NumberFormat.DIGITS, range_lo=0, range_hi=99,
                embedding={"kind": "value"},
                train=TrainConfig(max_epochs=3, seed=0),
                shuffle_seeds=(1, 2))
    args.update(kw)
    return ExperimentConfig(**args)


def test_split_seed_is_pure_and_sensitive():
    assert split_seed(0, 99, 1) == split_seed(0, 99, 1)
    assert split_seed(0, 99, 1) != split_seed(0, 99, 2)
    assert split_seed(0, 99, 1) != split_seed(0, 999, 1)
    assert isinstance(split_seed(-500, 500, 3), int)


def test_config_validation():
    with pytest.raises(ConfigError):
        quick_value_decode(mode="sideways")
    with pytest.raises(ConfigError):
        quick_value_decode(mode="extrapolate")  # needs test_ranges
    with pytest.raises(ConfigError):
        quick_value_decode(test_ranges=((1, 2),))  # interpolate + test_ranges
    with pytest.raises(ConfigError):
        quick_value_decode(range_lo=5, range_hi=4)
    with pytest.raises(ConfigError):
        quick_value_decode(fmt=NumberFormat.WORDS, range_hi=200)
    with pytest.raises(ConfigError):
        quick_value_decode(embedding={"kind": "mystery"})
    with pytest.raises(ConfigError):
        quick_value_decode(variance_factor=0.0)
    with pytest.raises(ConfigError):
        quick_value_decode(shuffle_seeds=())


def test_config_from_dict_round_trip():
    cfg = config_from_dict({
        "task": "listmax", "format": "words", "range": [0, 99],
        "embedding": {"kind": "charlstm"},
        "train": {"max_epochs": 7, "lr": 0.01},
        "probe": {"lstm_hidden": 32, "bidirectional": False},
        "n_train": 500, "n_test": 100, "shuffle_seeds": [4],
        "variance_factor": 0.02,
    })
    assert cfg.fmt is NumberFormat.WORDS
    assert cfg.train.max_epochs == 7 and cfg.train.lr == 0.01
    assert cfg.probe.lstm_hidden == 32 and not cfg.probe.bidirectional
    assert cfg.shuffle_seeds == (4,)
    assert cfg.variance_factor == 0.02


def test_config_from_dict_errors():
    with pytest.raises(ConfigError):
        config_from_dict({"task": "decode", "embedding": {"kind": "value"}})
    with pytest.raises(ConfigError):
        config_from_dict({"task": "decode", "range": [0, 9],
                          "format": "roman", "embedding": {"kind": "value"}})
    with pytest.raises(ConfigError):
        config_from_dict({"task": "fly", "range": [0, 9],
                          "embedding": {"kind": "value"}})
    with pytest.raises(ConfigError):
        config_from_dict({"task": "decode", "range": [0, 9]})


def test_run_experiment_emits_one_row_per_shuffle():
    rep = run_experiment(quick_value_decode())
    assert len(rep.rows) == 2 and not rep.errors
    assert {r.shuffle_index for r in rep.rows} == {1, 2}
    assert all(r.metric == "rmse" and np.isfinite(r.value) for r in rep.rows)
    aggs = rep.aggregates()
    assert len(aggs) == 1
    vals = [r.value for r in rep.rows]
    assert aggs[0]["mean"] == pytest.approx(np.mean(vals))
    assert aggs[0]["std"] == pytest.approx(np.std(vals, ddof=1))


def test_run_experiment_isolates_failures():
    cfg = quick_value_decode(
        embedding={"kind": "file", "path": "/nonexistent/vectors.txt"})
    rep = run_experiment(cfg)
    assert len(rep.errors) == 2
    assert all(np.isnan(r.value) for r in rep.rows)
    assert np.isnan(rep.aggregates()[0]["mean"])


def test_rows_csv_round_trip(tmp_path):
    rep = run_experiment(quick_value_decode())
    path = tmp_path / "report.csv"
    write_rows_csv(rep.rows, path)
    back = read_rows_csv(path)
    assert back == rep.rows
    aggs = aggregate_rows(back)
    assert len(aggs) == 1


def _write_tiny_manifest(path):
    doc = {"experiments": [{
        "task": "decode", "format": "digits", "range": [0, 99],
        "embedding": {"kind": "value"},
        "train": {"max_epochs": 3},
        "shuffle_seeds": [1, 2],
    }]}
    path.write_text(yaml.safe_dump(doc))


def test_run_suite_reports_are_byte_identical(tmp_path):
    manifest = tmp_path / "suite.yaml"
    _write_tiny_manifest(manifest)
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        rows, aggs, errors = run_suite(manifest, out)
        assert rows and not errors
        outputs.append({f.name: f.read_bytes()
                        for f in sorted(out.iterdir())})
    assert set(outputs[0]) == {"report.csv", "aggregate.csv", "aggregate.json"}
    assert outputs[0] == outputs[1]


def test_aggregate_json_structure(tmp_path):
    manifest = tmp_path / "suite.yaml"
    _write_tiny_manifest(manifest)
    run_suite(manifest, tmp_path / "out")
    doc = json.loads((tmp_path / "out" / "aggregate.json").read_text())
    assert "version" in doc
    (agg,) = doc["aggregates"]
    assert agg["metric"] == "rmse" and agg["n"] == 2


def test_load_suite_rejects_malformed(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        load_suite(bad)
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    assert load_suite(empty) == []


def test_extrapolate_mode_emits_row_per_test_range():
    cfg = ExperimentConfig(
        task="listmax", fmt=NumberFormat.DIGITS, range_lo=0, range_hi=60,
        embedding={"kind": "value"}, mode="extrapolate",
        test_ranges=((61, 70), (61, 80)), variance_factor=0.01,
        train=TrainConfig(max_epochs=1, seed=0),
        n_train=800, n_test=200, shuffle_seeds=(1,))
    rep = run_experiment(cfg)
    assert not rep.errors
    assert [(r.range_lo, r.range_hi) for r in rep.rows] == [(61, 70), (61, 80)]


def test_word_format_coverage_through_runner():
    cfg = ExperimentConfig(
        task="listmax", fmt=NumberFormat.WORDS, range_lo=0, range_hi=99,
        embedding={"kind": "random", "dim": 16},
        train=TrainConfig(max_epochs=1, seed=0),
        n_train=600, n_test=200, shuffle_seeds=(1,))
    rep = run_experiment(cfg)
    assert not rep.errors and np.isfinite(rep.rows[0].value)
