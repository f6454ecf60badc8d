"""Writing (and scanning) text vector files.

Format: one `surface f1 f2 ... fd` line per token, optionally preceded by a
`count dim` header — the format the probing harness loads.
"""

from __future__ import annotations

import numpy as np


def write_vector_file(path, entries, header: bool = True) -> None:
    """Write `(surface, vector)` pairs; all vectors must share one dimension."""
    entries = list(entries)
    dims = {len(v) for _, v in entries}
    if len(dims) > 1:
        raise ValueError(f"mixed vector dimensions {sorted(dims)}")
    with open(path, "w", encoding="utf-8") as f:
        if header and entries:
            f.write(f"{len(entries)} {len(entries[0][1])}\n")
        for surface, vec in entries:
            fields = " ".join(repr(float(x)) for x in vec)
            f.write(f"{surface} {fields}\n")


def scan_vector_file(path):
    """Yield (surface, vector) pairs; skips a leading `count dim` header."""
    with open(path, encoding="utf-8") as f:
        first = True
        for line in f:
            parts = line.split()
            if not parts:
                continue
            if first:
                first = False
                if len(parts) == 2 and all(_is_int(p) for p in parts):
                    continue
            yield parts[0], np.array([float(x) for x in parts[1:]])


def _is_int(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False
