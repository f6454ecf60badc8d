"""Filter a pretrained static vector resource down to number surfaces."""

from __future__ import annotations

import json
import sys

from .numerals import surfaces_for_range
from .vecfile import scan_vector_file, write_vector_file


def extract_static(source_path, out_path, lo: int, hi: int, fmt: str,
                   sidecar_path=None) -> dict:
    """Write the vectors of every number surface in [lo, hi] to ``out_path``.

    Surfaces absent from the source vocabulary are listed on stderr and in a
    JSON sidecar (``<out_path>.missing.json`` by default); the partial file
    is still written.  Returns ``{"written": n, "missing": [...], "dim": d}``.
    """
    wanted = surfaces_for_range(lo, hi, fmt)
    wanted_set = set(wanted)
    found = {}
    dim = None
    for surface, vec in scan_vector_file(source_path):
        if surface in wanted_set and surface not in found:
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise ValueError(
                    f"{source_path}: {surface!r} has dimension {len(vec)}, expected {dim}")
            found[surface] = vec
    missing = [s for s in wanted if s not in found]
    entries = [(s, found[s]) for s in wanted if s in found]
    write_vector_file(out_path, entries)
    for s in missing:
        print(f"missing from vocabulary: {s}", file=sys.stderr)
    if sidecar_path is None:
        sidecar_path = f"{out_path}.missing.json"
    with open(sidecar_path, "w", encoding="utf-8") as f:
        json.dump({"source": str(source_path), "requested": len(wanted),
                   "written": len(entries), "missing": missing}, f, indent=2)
        f.write("\n")
    return {"written": len(entries), "missing": missing, "dim": dim}
