"""Command-line entry point.

Subcommands:

* ``run``       - execute a YAML experiment manifest, write CSV/JSON reports
* ``sweep``     - train a regression probe and dump predictions over a range
* ``gen-data``  - generate synthetic task datasets as text files
* ``gradcheck`` - finite-difference check of every model family
* ``report``    - recompute aggregates from a per-shuffle report CSV

Exit codes: 0 success, 1 experiment/check failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .neural.gradcheck import run_all
from .numeral import NumberFormat
from .runner import (
    ConfigError,
    aggregate_rows,
    config_from_dict,
    read_rows_csv,
    run_suite,
    run_sweep,
    write_aggregates,
)
from .taskgen import (
    DEFAULT_N_TEST,
    DEFAULT_N_TRAIN,
    SUBSAMPLE_FRACTION,
    SUBSAMPLE_RANGE_THRESHOLD,
    dump_dataset,
    gen_add,
    gen_decode,
    gen_listmax,
    gen_listmax_float,
    make_split,
)

GRADCHECK_THRESHOLD = 1e-4


def _parse_range(text: str) -> tuple:
    """'lo:hi' with negative endpoints allowed, e.g. '-500:500'."""
    try:
        lo_s, hi_s = text.rsplit(":", 1)
        lo, hi = int(lo_s), int(hi_s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="numprobe",
                                description="numeracy probing experiments")
    p.add_argument("--version", action="version", version=f"numprobe {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a YAML experiment manifest")
    run_p.add_argument("--config", required=True, help="manifest path")
    run_p.add_argument("--out-dir", default="reports", help="report directory")

    sweep_p = sub.add_parser("sweep", help="prediction dump for a trained probe")
    sweep_p.add_argument("--train-range", type=_parse_range, default=(-500, 500),
                         metavar="LO:HI")
    sweep_p.add_argument("--eval-range", type=_parse_range, default=(-2000, 2000),
                         metavar="LO:HI")
    sweep_p.add_argument("--task", choices=["decode"], default="decode")
    sweep_p.add_argument("--embedding", default="value",
                         choices=["value", "charcnn", "charlstm", "random"])
    sweep_p.add_argument("--format", dest="fmt", default=None,
                         choices=[f.name.lower() for f in NumberFormat])
    sweep_p.add_argument("--seed", type=int, default=1, help="shuffle seed")
    sweep_p.add_argument("--out-dir", default=".")

    gen_p = sub.add_parser("gen-data", help="write synthetic datasets to text files")
    gen_p.add_argument("--task", required=True, choices=["listmax", "decode", "add"])
    gen_p.add_argument("--range", type=_parse_range, required=True, metavar="LO:HI")
    gen_p.add_argument("--format", dest="fmt", default="digits",
                       choices=[f.name.lower() for f in NumberFormat])
    gen_p.add_argument("--n-train", type=int, default=DEFAULT_N_TRAIN)
    gen_p.add_argument("--n-test", type=int, default=DEFAULT_N_TEST)
    gen_p.add_argument("--seed", type=int, default=1, help="pool shuffle seed")
    gen_p.add_argument("--out-dir", default=".")

    check_p = sub.add_parser("gradcheck", help="finite-difference gradient check")
    check_p.add_argument("--seed", type=int, default=0)

    rep_p = sub.add_parser("report", help="recompute aggregates from report.csv")
    rep_p.add_argument("--config", dest="rows_csv", required=True,
                       metavar="REPORT_CSV", help="per-shuffle report CSV")
    rep_p.add_argument("--out-dir", default="reports")
    return p


def _cmd_run(args) -> int:
    rows, aggs, errors = run_suite(args.config, args.out_dir)
    if not rows:
        print("warning: empty manifest, nothing to run", file=sys.stderr)
        return 0
    print(f"wrote {len(rows)} rows, {len(aggs)} aggregates to {args.out_dir}")
    for shuffle, message in errors:
        print(f"failed cell (shuffle {shuffle}): {message}", file=sys.stderr)
    return 1 if errors else 0


def _cmd_sweep(args) -> int:
    lo, hi = args.train_range
    if args.fmt is None:
        fmt = NumberFormat.NEGATIVE_DIGITS if lo < 0 else NumberFormat.DIGITS
    else:
        fmt = NumberFormat[args.fmt.upper()]
    from .runner import ExperimentConfig

    cfg = ExperimentConfig(
        task=args.task, fmt=fmt, range_lo=lo, range_hi=hi,
        embedding={"kind": args.embedding},
        shuffle_seeds=(args.seed,),
    )
    os.makedirs(args.out_dir, exist_ok=True)
    out_path = os.path.join(args.out_dir, "sweep.csv")
    n = run_sweep(cfg, args.eval_range[0], args.eval_range[1], out_path)
    print(f"wrote {n} predictions to {out_path}")
    return 0


def _cmd_gen_data(args) -> int:
    lo, hi = args.range
    fmt = NumberFormat[args.fmt.upper()]
    split = make_split(lo, hi, args.seed)
    range_size = hi - lo + 1
    sets = {}
    if args.task == "listmax":
        if fmt is NumberFormat.FLOAT1:
            sets["train"] = gen_listmax_float(split.train_pool, args.n_train, seed=args.seed + 1)
            sets["test"] = gen_listmax_float(split.test_pool, args.n_test, seed=args.seed + 2)
        else:
            sets["train"] = gen_listmax(split.train_pool, args.n_train, range_size,
                                        fmt, seed=args.seed + 1)
            sets["test"] = gen_listmax(split.test_pool, args.n_test, range_size,
                                       fmt, seed=args.seed + 2)
    elif args.task == "decode":
        sets["train"] = gen_decode(split.train_pool, fmt)
        sets["test"] = gen_decode(split.test_pool, fmt)
    else:
        frac = SUBSAMPLE_FRACTION if range_size > SUBSAMPLE_RANGE_THRESHOLD else 1.0
        sets["train"] = gen_add(split.train_pool, fmt, seed=args.seed + 1, subsample_frac=frac)
        sets["test"] = gen_add(split.test_pool, fmt, seed=args.seed + 2, subsample_frac=frac)
    os.makedirs(args.out_dir, exist_ok=True)
    for name, instances in sets.items():
        path = os.path.join(args.out_dir, f"{args.task}_{args.fmt}_{lo}_{hi}_{name}.tsv")
        dump_dataset(instances, path)
        print(f"wrote {len(instances)} instances to {path}")
    return 0


def _cmd_gradcheck(args) -> int:
    errors = run_all(seed=args.seed)
    ok = True
    for family, err in errors.items():
        status = "ok" if err < GRADCHECK_THRESHOLD else "FAIL"
        ok &= err < GRADCHECK_THRESHOLD
        print(f"{family:20s} max relative error {err:.3e}  {status}")
    return 0 if ok else 1


def _cmd_report(args) -> int:
    rows = read_rows_csv(args.rows_csv)
    aggs = aggregate_rows(rows)
    os.makedirs(args.out_dir, exist_ok=True)
    write_aggregates(aggs, os.path.join(args.out_dir, "aggregate.csv"),
                     os.path.join(args.out_dir, "aggregate.json"))
    print(f"wrote {len(aggs)} aggregates to {args.out_dir}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "gen-data": _cmd_gen_data,
        "gradcheck": _cmd_gradcheck,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
