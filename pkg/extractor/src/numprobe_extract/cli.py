"""Command-line entry point for the two extraction pathways."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .contextual import ExtractionManifest, ModelLoadError, extract_contextual
from .numerals import FORMATS, DomainError
from .static import extract_static


def _parse_range(text: str) -> tuple:
    try:
        lo_s, hi_s = text.rsplit(":", 1)
        lo, hi = int(lo_s), int(hi_s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="numprobe-extract",
                                description="export number-token vectors")
    p.add_argument("--version", action="version",
                   version=f"numprobe-extract {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    st = sub.add_parser("static", help="filter a static vector file")
    st.add_argument("--source", required=True, help="pretrained vector file")
    st.add_argument("--range", type=_parse_range, required=True, metavar="LO:HI")
    st.add_argument("--format", default="digits", choices=FORMATS)
    st.add_argument("--out", required=True)

    cx = sub.add_parser("contextual", help="run a local transformer model")
    cx.add_argument("--manifest", help="YAML manifest (overridden by flags)")
    cx.add_argument("--model", help="local model path")
    cx.add_argument("--range", type=_parse_range, metavar="LO:HI")
    cx.add_argument("--format", default=None, choices=FORMATS)
    cx.add_argument("--layer", type=int, default=None)
    cx.add_argument("--out", default=None)
    return p


def _cmd_static(args) -> int:
    result = extract_static(args.source, args.out, args.range[0], args.range[1],
                            args.format)
    print(f"wrote {result['written']} vectors to {args.out}"
          f" ({len(result['missing'])} missing)")
    return 0


def _cmd_contextual(args) -> int:
    if args.manifest:
        m = ExtractionManifest.from_yaml(args.manifest)
        m = ExtractionManifest(
            model=args.model or m.model,
            range_lo=args.range[0] if args.range else m.range_lo,
            range_hi=args.range[1] if args.range else m.range_hi,
            fmt=args.format or m.fmt,
            layer=m.layer if args.layer is None else args.layer,
            out_path=args.out or m.out_path,
        )
    else:
        if not (args.model and args.range):
            print("contextual needs --manifest or both --model and --range",
                  file=sys.stderr)
            return 2
        m = ExtractionManifest(
            model=args.model, range_lo=args.range[0], range_hi=args.range[1],
            fmt=args.format or "digits",
            layer=0 if args.layer is None else args.layer,
            out_path=args.out or "vectors.txt",
        )
    result = extract_contextual(m)
    print(f"wrote {result['written']} vectors to {m.out_path} (dim {result['dim']})")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return {"static": _cmd_static, "contextual": _cmd_contextual}[args.command](args)
    except (DomainError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ModelLoadError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
