"""Experiment orchestration: configs, interpolation/extrapolation runs,
multi-shuffle aggregation, and CSV/JSON report emission.

A single experiment trains one probe per shuffle seed.  The pool split for a
given (range, shuffle index) is a pure function of those values, so every
embedding method sees identical splits and results are comparable cell by
cell, as in the paper's tables.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import __version__
from .embed import (
    CharCNNEncoder,
    CharLSTMEncoder,
    TableProvider,
    ValueProvider,
    load_table,
    random_table,
)
from .numeral import FormatRangeError, NumberFormat, make_token
from .probe import (
    MetricResult,
    ProbeSpec,
    TrainConfig,
    evaluate,
    predict_sweep,
    train_probe,
)
from .taskgen import (
    DEFAULT_N_TEST,
    DEFAULT_N_TRAIN,
    LIST_LEN,
    SPREAD_VARIANCE_FACTOR,
    SUBSAMPLE_FRACTION,
    SUBSAMPLE_RANGE_THRESHOLD,
    gen_add,
    gen_decode,
    gen_listmax,
    gen_listmax_float,
    make_split,
)

DEFAULT_SHUFFLE_SEEDS = (1, 2, 3, 4, 5)

CSV_COLUMNS = [
    "task", "format", "range_lo", "range_hi", "mode",
    "embedding", "probe", "shuffle_index", "metric", "value",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    fmt: NumberFormat
    range_lo: int
    range_hi: int
    embedding: dict  # kind + kind-specific options
    probe: ProbeSpec = None
    train: TrainConfig = None
    mode: str = "interpolate"  # "interpolate" | "extrapolate"
    test_ranges: tuple = ()  # extrapolate only: ((lo, hi), ...)
    shuffle_seeds: tuple = DEFAULT_SHUFFLE_SEEDS
    n_train: int = DEFAULT_N_TRAIN
    n_test: int = DEFAULT_N_TEST
    variance_factor: float = SPREAD_VARIANCE_FACTOR

    def __post_init__(self):
        if self.variance_factor <= 0:
            raise ConfigError("variance_factor must be positive")
        if self.probe is None:
            object.__setattr__(self, "probe", ProbeSpec(self.task))
        if self.train is None:
            object.__setattr__(self, "train", TrainConfig())
        if self.mode not in ("interpolate", "extrapolate"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "extrapolate" and not self.test_ranges:
            raise ConfigError("extrapolate mode needs at least one test range")
        if self.mode == "interpolate" and self.test_ranges:
            raise ConfigError("test_ranges only apply to extrapolate mode")
        if not self.shuffle_seeds:
            raise ConfigError("shuffle seed list must be nonempty")
        if self.range_hi < self.range_lo:
            raise ConfigError(f"empty range [{self.range_lo}, {self.range_hi}]")
        if self.fmt is NumberFormat.WORDS and not (0 <= self.range_lo and self.range_hi <= 99):
            raise ConfigError("word-form numbers are limited to [0, 99]")
        if self.fmt is NumberFormat.FLOAT1 and self.task != "listmax":
            raise ConfigError("float lists are generated for the list-max task only")
        if self.embedding.get("kind") not in ("file", "random", "value", "charcnn", "charlstm"):
            raise ConfigError(f"unknown embedding kind {self.embedding.get('kind')!r}")


@dataclass(frozen=True)
class ReportRow:
    task: str
    fmt: str
    range_lo: int
    range_hi: int
    mode: str
    embedding: str
    probe: str
    shuffle_index: int
    metric: str
    value: float  # NaN marks a failed cell

    def as_list(self):
        return [self.task, self.fmt, self.range_lo, self.range_hi, self.mode,
                self.embedding, self.probe, self.shuffle_index, self.metric,
                repr(self.value)]


@dataclass
class ExperimentReport:
    config: dict  # config echo
    rows: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # (shuffle_index, message)

    def aggregates(self) -> list:
        """Mean/sample-std/n per (range, metric) over non-failed shuffles."""
        groups = {}
        for r in self.rows:
            groups.setdefault((r.range_lo, r.range_hi, r.metric), []).append(r)
        out = []
        for (lo, hi, metric), rows in sorted(groups.items()):
            vals = [r.value for r in rows if not math.isnan(r.value)]
            base = rows[0]
            out.append({
                "task": base.task, "format": base.fmt,
                "range_lo": lo, "range_hi": hi, "mode": base.mode,
                "embedding": base.embedding, "probe": base.probe,
                "metric": metric, "n": len(vals),
                "mean": float(np.mean(vals)) if vals else float("nan"),
                "std": float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0,
            })
        return out


def split_seed(range_lo: int, range_hi: int, shuffle_index: int) -> int:
    """Deterministic split seed shared by every embedding method.

    Ranges may be negative, so offsets map the entropy tuple into the
    non-negative ints SeedSequence accepts.
    """
    off = 1 << 20
    ss = np.random.SeedSequence([range_lo + off, range_hi + off, shuffle_index])
    return int(ss.generate_state(1)[0])


def _range_surfaces(fmt: NumberFormat, ranges) -> list:
    """Every surface a table provider must cover for the given ranges."""
    surfaces = []
    for lo, hi in ranges:
        for v in range(lo, hi + 1):
            if fmt is NumberFormat.FLOAT1:
                surfaces.extend(make_token(10 * v + d, fmt).surface for d in range(10))
            else:
                surfaces.append(make_token(v, fmt).surface)
    return surfaces


def _probe_label(spec: ProbeSpec) -> str:
    return spec.head


def _embedding_label(emb: dict) -> str:
    kind = emb["kind"]
    if kind == "file":
        return f"file:{os.path.basename(emb['path'])}"
    if kind == "random":
        return f"random{emb.get('dim', 300)}"
    if kind in ("charcnn", "charlstm") and not emb.get("trainable", True):
        return f"{kind}-untrained"
    return kind


def make_provider(emb: dict, cfg: ExperimentConfig, shuffle_index: int):
    """Build the embedding provider for one shuffle.

    Randomly initialized providers re-seed per shuffle so the report's std
    reflects initialization variance as well as split variance.
    """
    kind = emb["kind"]
    base_seed = int(emb.get("seed", 0))
    if kind == "file":
        return load_table(emb["path"], expected_dim=emb.get("dim"))
    if kind == "value":
        return ValueProvider(log_scale=bool(emb.get("log_scale", True)))
    ranges = [(cfg.range_lo, cfg.range_hi)] + list(cfg.test_ranges)
    if kind == "random":
        surfaces = _range_surfaces(cfg.fmt, ranges)
        return random_table(surfaces, dim=int(emb.get("dim", 300)),
                            seed=base_seed + 7919 * shuffle_index)
    if kind == "charcnn":
        ctor, keys = CharCNNEncoder, ("char_dim", "filters", "widths")
    else:
        ctor, keys = CharLSTMEncoder, ("char_dim", "hidden")
    kwargs = {k: emb[k] for k in keys if k in emb}
    return ctor(seed=base_seed + 7919 * shuffle_index,
                trainable=bool(emb.get("trainable", True)), **kwargs)


VAL_POOL_FRACTION = 0.1
MAX_VAL_LISTS = 5000


def _build_datasets(cfg: ExperimentConfig, shuffle_index: int):
    """(train, val_or_None, [(range, test_instances), ...]) for one shuffle.

    For list-max the validation lists are generated from surfaces carved out
    of the training pool: probes over few distinct surfaces can memorize
    every training surface, so only unseen-surface lists give early stopping
    a signal that tracks test generalization.
    """
    seed = split_seed(cfg.range_lo, cfg.range_hi, shuffle_index)
    rng = np.random.Generator(np.random.PCG64(seed))
    data_seed = lambda: int(rng.integers(0, 2**31))  # noqa: E731

    if cfg.mode == "interpolate":
        split = make_split(cfg.range_lo, cfg.range_hi, seed)
        train_pool, test_pools = split.train_pool, [split.test_pool]
        ranges = [(cfg.range_lo, cfg.range_hi)]
    else:
        train_pool = tuple(range(cfg.range_lo, cfg.range_hi + 1))
        test_pools = [tuple(range(lo, hi + 1)) for lo, hi in cfg.test_ranges]
        ranges = list(cfg.test_ranges)

    range_size = cfg.range_hi - cfg.range_lo + 1

    def listmax_set(pool, n):
        if cfg.fmt is NumberFormat.FLOAT1:
            return gen_listmax_float(pool, n, seed=data_seed())
        return gen_listmax(pool, n, range_size, cfg.fmt, seed=data_seed(),
                           variance_factor=cfg.variance_factor)

    val_set = None
    if cfg.task == "listmax":
        n_val_pool = round(VAL_POOL_FRACTION * len(train_pool))
        if n_val_pool >= LIST_LEN and len(train_pool) - n_val_pool >= LIST_LEN:
            pool_order = rng.permutation(len(train_pool))
            val_pool = tuple(sorted(train_pool[i] for i in pool_order[:n_val_pool]))
            train_pool = tuple(sorted(train_pool[i] for i in pool_order[n_val_pool:]))
            val_set = listmax_set(val_pool, min(MAX_VAL_LISTS, cfg.n_test))
        train_set = listmax_set(train_pool, cfg.n_train)
        test_sets = [listmax_set(pool, cfg.n_test) for pool in test_pools]
    elif cfg.task == "decode":
        train_set = gen_decode(train_pool, cfg.fmt)
        test_sets = [gen_decode(pool, cfg.fmt) for pool in test_pools]
    else:
        frac = SUBSAMPLE_FRACTION if range_size > SUBSAMPLE_RANGE_THRESHOLD else 1.0
        train_set = gen_add(train_pool, cfg.fmt, seed=data_seed(), subsample_frac=frac)
        test_sets = [gen_add(pool, cfg.fmt, seed=data_seed(), subsample_frac=frac)
                     for pool in test_pools]
    return train_set, val_set, list(zip(ranges, test_sets))


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Train and evaluate one probe per shuffle seed; aggregate the metrics.

    A failure in one shuffle (non-finite loss, missing coverage) is recorded
    as a NaN row and does not disturb the other shuffles.
    """
    emb_label = _embedding_label(cfg.embedding)
    probe_label = _probe_label(cfg.probe)
    report = ExperimentReport(config=config_to_dict(cfg))

    for shuffle in cfg.shuffle_seeds:
        def row(lo, hi, metric, value):
            return ReportRow(cfg.task, cfg.fmt.name.lower(), lo, hi, cfg.mode,
                             emb_label, probe_label, shuffle, metric, value)

        metric_name = "accuracy5" if cfg.task == "listmax" else "rmse"
        try:
            train_set, val_set, test_sets = _build_datasets(cfg, shuffle)
            provider = make_provider(cfg.embedding, cfg, shuffle)
            trained = train_probe(cfg.probe, provider, train_set, cfg.train,
                                  val_instances=val_set)
            for (lo, hi), test_set in test_sets:
                result = evaluate(trained, test_set)
                report.rows.append(row(lo, hi, result.metric, result.value))
        except Exception as e:  # failure isolation per shuffle
            report.errors.append((shuffle, f"{type(e).__name__}: {e}"))
            ranges = [(cfg.range_lo, cfg.range_hi)] if cfg.mode == "interpolate" \
                else list(cfg.test_ranges)
            for lo, hi in ranges:
                report.rows.append(row(lo, hi, metric_name, float("nan")))
    return report


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "task": cfg.task,
        "format": cfg.fmt.name.lower(),
        "range": [cfg.range_lo, cfg.range_hi],
        "embedding": dict(cfg.embedding),
        "probe": {
            "head": cfg.probe.head,
            "lstm_hidden": cfg.probe.lstm_hidden,
            "mlp_hidden": list(cfg.probe.mlp_hidden),
            "bidirectional": cfg.probe.bidirectional,
        },
        "train": {
            "max_epochs": cfg.train.max_epochs,
            "batch_size": cfg.train.batch_size,
            "patience": cfg.train.patience,
            "val_fraction": cfg.train.val_fraction,
            "seed": cfg.train.seed,
            "lr": cfg.train.lr,
        },
        "mode": cfg.mode,
        "test_ranges": [list(r) for r in cfg.test_ranges],
        "shuffle_seeds": list(cfg.shuffle_seeds),
        "n_train": cfg.n_train,
        "n_test": cfg.n_test,
        "variance_factor": cfg.variance_factor,
        "version": __version__,
    }


def config_from_dict(d: dict) -> ExperimentConfig:
    """Parse one experiment entry of a manifest (documented in README)."""
    try:
        fmt = NumberFormat[d.get("format", "digits").upper()]
    except KeyError:
        raise ConfigError(f"unknown number format {d.get('format')!r}") from None
    try:
        lo, hi = d["range"]
    except (KeyError, ValueError, TypeError):
        raise ConfigError("experiment needs a two-element 'range'") from None
    probe_d = d.get("probe", {})
    train_d = d.get("train", {})
    task = d.get("task", "")
    if task not in ("listmax", "decode", "add"):
        raise ConfigError(f"unknown task {task!r}")
    probe = ProbeSpec(
        task,
        head=probe_d.get("head", ""),
        lstm_hidden=int(probe_d.get("lstm_hidden", 100)),
        mlp_hidden=tuple(probe_d.get("mlp_hidden", (100, 100))),
        bidirectional=bool(probe_d.get("bidirectional", True)),
    )
    train = TrainConfig(
        max_epochs=int(train_d.get("max_epochs", 100)),
        batch_size=int(train_d.get("batch_size", 32)),
        patience=int(train_d.get("patience", 5)),
        val_fraction=float(train_d.get("val_fraction", 0.1)),
        seed=int(train_d.get("seed", 0)),
        lr=float(train_d.get("lr", 1e-3)),
    )
    if "embedding" not in d or not isinstance(d["embedding"], dict):
        raise ConfigError("experiment needs an 'embedding' mapping")
    return ExperimentConfig(
        task=task,
        fmt=fmt,
        range_lo=int(lo),
        range_hi=int(hi),
        embedding=dict(d["embedding"]),
        probe=probe,
        train=train,
        mode=d.get("mode", "interpolate"),
        test_ranges=tuple(tuple(r) for r in d.get("test_ranges", [])),
        shuffle_seeds=tuple(d.get("shuffle_seeds", DEFAULT_SHUFFLE_SEEDS)),
        n_train=int(d.get("n_train", DEFAULT_N_TRAIN)),
        n_test=int(d.get("n_test", DEFAULT_N_TEST)),
        variance_factor=float(d.get("variance_factor", SPREAD_VARIANCE_FACTOR)),
    )


def load_suite(path) -> list:
    """Experiment configs from a YAML manifest ({experiments: [...]})."""
    with open(path, encoding="utf-8") as f:
        doc = yaml.safe_load(f)
    if doc is None:
        return []
    if not isinstance(doc, dict) or not isinstance(doc.get("experiments", []), list):
        raise ConfigError(f"{path}: expected a mapping with an 'experiments' list")
    return [config_from_dict(d) for d in doc.get("experiments", [])]


def write_rows_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r.as_list())


def read_rows_csv(path) -> list:
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_COLUMNS:
            raise ConfigError(f"{path}: unexpected columns {reader.fieldnames}")
        for d in reader:
            rows.append(ReportRow(
                d["task"], d["format"], int(d["range_lo"]), int(d["range_hi"]),
                d["mode"], d["embedding"], d["probe"], int(d["shuffle_index"]),
                d["metric"], float(d["value"]),
            ))
    return rows


def write_aggregates(aggregates, csv_path, json_path) -> None:
    cols = ["task", "format", "range_lo", "range_hi", "mode", "embedding",
            "probe", "metric", "n", "mean", "std"]
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(cols)
        for a in aggregates:
            w.writerow([a[c] if c not in ("mean", "std") else repr(a[c]) for c in cols])
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump({"version": __version__, "aggregates": aggregates}, f, indent=2)
        f.write("\n")


def aggregate_rows(rows) -> list:
    """Recompute aggregates from per-shuffle rows (the `report` CLI flow)."""
    report = ExperimentReport(config={})
    report.rows = list(rows)
    groups = {}
    for r in report.rows:
        key = (r.task, r.fmt, r.mode, r.embedding, r.probe, r.range_lo, r.range_hi, r.metric)
        groups.setdefault(key, []).append(r)
    out = []
    for key in sorted(groups):
        sub = ExperimentReport(config={})
        sub.rows = groups[key]
        out.extend(sub.aggregates())
    return out


def run_suite(suite_path, out_dir) -> tuple:
    """Run every experiment in a manifest; write row + aggregate reports.

    Returns (all_rows, aggregates, errors).  Failed cells carry NaN values
    and are excluded from aggregate means.
    """
    configs = load_suite(suite_path)
    os.makedirs(out_dir, exist_ok=True)
    all_rows, all_aggs, errors = [], [], []
    for cfg in configs:
        rep = run_experiment(cfg)
        all_rows.extend(rep.rows)
        all_aggs.extend(rep.aggregates())
        errors.extend(rep.errors)
    write_rows_csv(all_rows, os.path.join(out_dir, "report.csv"))
    write_aggregates(all_aggs, os.path.join(out_dir, "aggregate.csv"),
                     os.path.join(out_dir, "aggregate.json"))
    return all_rows, all_aggs, errors


def run_sweep(cfg: ExperimentConfig, eval_lo: int, eval_hi: int, out_path) -> int:
    """Figure-style prediction dump: train a regression probe on a split of
    the configured range, then write predictions for every integer in
    [eval_lo, eval_hi] as CSV (value, prediction, in_train_range).

    Returns the number of rows written; values the provider cannot embed or
    the format cannot render are skipped.
    """
    if cfg.task not in ("decode", "add"):
        raise ConfigError("sweeps require a regression task (decode or add)")
    shuffle = cfg.shuffle_seeds[0]
    train_set, val_set, _ = _build_datasets(cfg, shuffle)
    provider = make_provider(cfg.embedding, cfg, shuffle)
    trained = train_probe(cfg.probe, provider, train_set, cfg.train,
                          val_instances=val_set)
    rows = predict_sweep(trained, range(eval_lo, eval_hi + 1), cfg.fmt,
                         (cfg.range_lo, cfg.range_hi))
    with open(out_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["value", "prediction", "in_train_range"])
        for v, p, in_range in rows:
            w.writerow([v, repr(p), int(in_range)])
    return len(rows)
