"""Export per-surface vectors from a locally stored transformer model.

Each number surface is fed to the model as its own input sequence; the
vector is taken from the configured hidden-state layer and mean-pooled over
the surface's word pieces (special tokens excluded).  Inference runs in
eval mode with gradients disabled, so repeated extractions are identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

from .numerals import surfaces_for_range
from .vecfile import write_vector_file


class ModelLoadError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExtractionManifest:
    model: str  # local path or model identifier resolvable offline
    range_lo: int
    range_hi: int
    fmt: str = "digits"
    layer: int = 0  # hidden-state index; 0 is the embedding layer output
    out_path: str = "vectors.txt"

    @staticmethod
    def from_yaml(path) -> "ExtractionManifest":
        with open(path, encoding="utf-8") as f:
            doc = yaml.safe_load(f) or {}
        try:
            lo, hi = doc["range"]
        except (KeyError, ValueError, TypeError):
            raise ValueError(f"{path}: manifest needs a two-element 'range'") from None
        return ExtractionManifest(
            model=doc.get("model", ""),
            range_lo=int(lo), range_hi=int(hi),
            fmt=doc.get("format", "digits"),
            layer=int(doc.get("layer", 0)),
            out_path=doc.get("out", "vectors.txt"),
        )


def _load_model(name):
    try:
        import torch
        from transformers import AutoModel, AutoTokenizer
    except ImportError as e:
        raise ModelLoadError(f"torch/transformers unavailable: {e}") from e
    try:
        tokenizer = AutoTokenizer.from_pretrained(name)
        model = AutoModel.from_pretrained(name)
    except Exception as e:
        raise ModelLoadError(f"could not load model {name!r}: {e}") from e
    model.eval()
    return torch, tokenizer, model


def extract_contextual(manifest: ExtractionManifest) -> dict:
    """Run the manifest; returns ``{"written": n, "dim": d}``."""
    torch, tokenizer, model = _load_model(manifest.model)
    surfaces = surfaces_for_range(manifest.range_lo, manifest.range_hi, manifest.fmt)
    entries = []
    dim = None
    with torch.no_grad():
        for surface in surfaces:
            enc = tokenizer(surface, return_tensors="pt")
            out = model(**enc, output_hidden_states=True)
            hidden = out.hidden_states[manifest.layer][0]  # (pieces, dim)
            special = enc.get("special_tokens_mask")
            if special is None:
                ids = enc["input_ids"][0].tolist()
                keep = [i for i, t in enumerate(ids)
                        if t not in tokenizer.all_special_ids]
            else:
                keep = [i for i, m in enumerate(special[0].tolist()) if not m]
            if not keep:  # surface vanished in tokenization; pool everything
                keep = list(range(hidden.shape[0]))
            vec = hidden[keep].mean(dim=0).double().numpy()
            if dim is None:
                dim = len(vec)
            entries.append((surface, np.asarray(vec)))
    write_vector_file(manifest.out_path, entries)
    return {"written": len(entries), "dim": dim}
