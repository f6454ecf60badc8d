"""Task-specific probes: assembly, training with early stopping, metric
evaluation, and the prediction sweep used for the extrapolation plots.

A probe is a small differentiable model over token embeddings:

* list-max: LSTM over the 5 embeddings, a shared weight vector projects each
  position's hidden state to a logit, softmax + NLL over the 5 indices;
* decoding: linear or 3-layer MLP regression head, MSE;
* addition: 3-layer MLP over the concatenated pair, MSE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .embed import CoverageError, validate_coverage
from .neural.layers import (
    Dense,
    LstmLayer,
    Mlp3,
    mse,
    mse_backward,
    softmax_nll,
    softmax_nll_backward,
)
from .neural.params import Adam, NonFiniteLoss, ParamStore
from .numeral import NumberFormat, make_token
from .taskgen import AddInstance, DecodeInstance, ListMaxInstance

EVAL_BATCH = 1024


@dataclass(frozen=True)
class ProbeSpec:
    task: str  # "listmax" | "decode" | "add"
    head: str = ""  # "lstm" | "linear" | "mlp3"; default per task
    lstm_hidden: int = 100
    mlp_hidden: tuple = (100, 100)
    # Bidirectional reads let every position's logit see the whole list;
    # unidirectional probes top out well below the value-embedding oracle.
    bidirectional: bool = True

    def __post_init__(self):
        valid = {"listmax": {"lstm"}, "decode": {"linear", "mlp3"}, "add": {"mlp3"}}
        if self.task not in valid:
            raise ValueError(f"unknown task {self.task!r}")
        head = self.head or {"listmax": "lstm", "decode": "mlp3", "add": "mlp3"}[self.task]
        object.__setattr__(self, "head", head)
        if head not in valid[self.task]:
            raise ValueError(f"head {head!r} invalid for task {self.task!r}")


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 100
    batch_size: int = 32
    patience: int = 5  # counted in validation checks without improvement
    val_fraction: float = 0.1
    # Probes over few distinct surfaces can memorize within a fraction of an
    # epoch; checking validation several times per epoch lets early stopping
    # snapshot the generalization peak instead of overshooting it.
    val_checks_per_epoch: int = 1
    seed: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.val_fraction <= 0.5:
            raise ValueError("val_fraction must be in (0, 0.5]")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.val_checks_per_epoch < 1:
            raise ValueError("val_checks_per_epoch must be >= 1")


@dataclass(frozen=True)
class MetricResult:
    metric: str  # "accuracy5" | "rmse"
    value: float
    n: int


class _Encoded:
    """Instances as index arrays into a unique-token list (fast batching)."""

    def __init__(self, instances):
        surf_to_i = {}
        tokens = []

        def tid(tok):
            i = surf_to_i.get(tok.surface)
            if i is None:
                i = surf_to_i[tok.surface] = len(tokens)
                tokens.append(tok)
            return i

        idx_rows = []
        ys = []
        for inst in instances:
            if isinstance(inst, ListMaxInstance):
                idx_rows.append([tid(t) for t in inst.tokens])
                ys.append(inst.label)
                task = "listmax"
            elif isinstance(inst, DecodeInstance):
                idx_rows.append([tid(inst.token)])
                ys.append(inst.target)
                task = "decode"
            elif isinstance(inst, AddInstance):
                idx_rows.append([tid(inst.token_a), tid(inst.token_b)])
                ys.append(inst.target)
                task = "add"
            else:
                raise TypeError(f"unknown instance type {type(inst)!r}")
        self.task = task
        self.tokens = tokens
        self.idx = np.array(idx_rows, dtype=np.int64)
        if task == "listmax":
            self.y = np.array(ys, dtype=np.int64)
        else:
            self.y = np.array(ys, dtype=np.float64)

    def __len__(self):
        return len(self.idx)


class Probe:
    """Probe head over an embedding provider; owns its own ParamStore."""

    def __init__(self, spec: ProbeSpec, emb_dim: int, seed: int):
        self.spec = spec
        self.emb_dim = emb_dim
        self.store = ParamStore()
        rng = np.random.Generator(np.random.PCG64(seed))
        if spec.task == "listmax":
            self.lstm = LstmLayer(self.store, "probe.lstm", emb_dim, spec.lstm_hidden, rng)
            proj_in = spec.lstm_hidden
            if spec.bidirectional:
                self.lstm_rev = LstmLayer(self.store, "probe.lstm_rev", emb_dim, spec.lstm_hidden, rng)
                proj_in *= 2
            self.proj = Dense(self.store, "probe.proj", proj_in, 1, rng)
        elif spec.task == "decode":
            if spec.head == "linear":
                self.head = Dense(self.store, "probe.lin", emb_dim, 1, rng)
            else:
                self.head = Mlp3(self.store, "probe.mlp", emb_dim, spec.mlp_hidden, 1, rng)
        else:  # add
            self.head = Mlp3(self.store, "probe.mlp", 2 * emb_dim, spec.mlp_hidden, 1, rng)

    def forward(self, emb):
        """emb: (N,5,E) for listmax, (N,E) decode, (N,2,E) add.
        Returns (output, cache): logits (N,5) or predictions (N,)."""
        if self.spec.task == "listmax":
            h, lc = self.lstm.forward(emb)
            rc = None
            if self.spec.bidirectional:
                hr, rc = self.lstm_rev.forward(emb[:, ::-1])
                h = np.concatenate([h, hr[:, ::-1]], axis=2)
            N, T, H = h.shape
            logits, pc = self.proj.forward(h.reshape(N * T, H))
            return logits.reshape(N, T), (lc, rc, pc, h.shape)
        if self.spec.task == "add":
            emb = emb.reshape(emb.shape[0], -1)
        y, hc = self.head.forward(emb)
        return y[:, 0], hc

    def loss_and_backward(self, emb, y):
        """Forward + loss + full backward; returns (loss, d_emb)."""
        out, cache = self.forward(emb)
        if self.spec.task == "listmax":
            loss, probs = softmax_nll(out, y)
            d_logits = softmax_nll_backward(probs, y)
            lc, rc, pc, (N, T, H) = cache
            d_h = self.proj.backward(pc, d_logits.reshape(N * T, 1)).reshape(N, T, H)
            if self.spec.bidirectional:
                half = H // 2
                d_emb = self.lstm.backward(lc, d_h[:, :, :half])
                d_emb += self.lstm_rev.backward(rc, d_h[:, ::-1, half:])[:, ::-1]
            else:
                d_emb = self.lstm.backward(lc, d_h)
        else:
            loss, diff = mse(out, y)
            d_out = mse_backward(diff)[:, None]
            d_emb = self.head.backward(cache, d_out)
            if self.spec.task == "add":
                d_emb = d_emb.reshape(d_emb.shape[0], 2, self.emb_dim)
        return loss, d_emb

    def loss_only(self, emb, y) -> float:
        out, _ = self.forward(emb)
        if self.spec.task == "listmax":
            return softmax_nll(out, y)[0]
        return mse(out, y)[0]

    def predict(self, emb):
        out, _ = self.forward(emb)
        if self.spec.task == "listmax":
            return np.argmax(out, axis=1)
        return out


class TrainedProbe:
    def __init__(self, probe: Probe, provider, val_history=None):
        self.probe = probe
        self.provider = provider
        self.val_history = val_history or []  # per-epoch validation loss


class _BatchEmbedder:
    """Produces (batch_emb, backward hook) pairs for index batches.

    Frozen providers are encoded once for the whole unique-token set;
    trainable encoders run per batch on the batch's unique tokens, with
    duplicate tokens' gradients summed before the encoder backward pass.
    """

    def __init__(self, provider, tokens):
        self.provider = provider
        self.tokens = tokens
        self.frozen = not provider.trainable
        if self.frozen:
            self.matrix = provider.forward(tokens)[0]

    def embed(self, idx):
        shape = idx.shape + (self.provider.dim,)
        if self.frozen:
            return self.matrix[idx], None
        uniq, inverse = np.unique(idx, return_inverse=True)
        inverse = inverse.ravel()
        enc_out, cache = self.provider.forward([self.tokens[u] for u in uniq])
        emb = enc_out[inverse].reshape(shape)
        return emb, (inverse, cache, enc_out.shape)

    def backward(self, hook, d_emb):
        if hook is None:
            return
        inverse, cache, enc_shape = hook
        d_enc = np.zeros(enc_shape)
        np.add.at(d_enc, inverse, d_emb.reshape(-1, enc_shape[1]))
        self.provider.backward(cache, d_enc)


def _check_coverage(provider, tokens):
    missing = validate_coverage(provider, tokens)
    if missing:
        preview = ", ".join(repr(s) for s in missing[:5])
        raise CoverageError(f"{len(missing)} surfaces not embeddable (e.g. {preview})")


def train_probe(spec: ProbeSpec, provider, train_instances, cfg: TrainConfig,
                val_instances=None) -> TrainedProbe:
    """Train a probe on generated instances; returns the best-validation model.

    Trainable encoder parameters are optimized jointly with the probe head;
    frozen providers contribute no parameters to the optimizer.  Validation
    defaults to a val_fraction split of the training instances; callers may
    instead pass explicit ``val_instances`` (e.g. lists generated from
    held-out surfaces, which track generalization to unseen numbers far
    better than a split of the training lists).
    """
    if not train_instances:
        raise ValueError("empty training data")
    data = _Encoded(train_instances)
    if data.task != spec.task:
        raise ValueError(f"instances are {data.task!r}, spec wants {spec.task!r}")
    _check_coverage(provider, data.tokens)

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    if val_instances is not None:
        if not val_instances:
            raise ValueError("empty validation data")
        val_data = _Encoded(val_instances)
        if val_data.task != spec.task:
            raise ValueError("validation instances do not match the task")
        _check_coverage(provider, val_data.tokens)
        tr_idx = rng.permutation(len(data))
        val_idx = np.arange(len(val_data))
    else:
        order = rng.permutation(len(data))
        n_val = max(1, round(cfg.val_fraction * len(data)))
        if n_val >= len(data):
            raise ValueError("dataset too small to hold out validation examples")
        val_idx, tr_idx = order[:n_val], order[n_val:]
        val_data = data

    probe = Probe(spec, provider.dim, seed=cfg.seed)
    embedder = _BatchEmbedder(provider, data.tokens)
    val_embedder = embedder if val_data is data else _BatchEmbedder(provider, val_data.tokens)
    stores = [probe.store] + ([provider.store] if provider.trainable else [])
    opts = [Adam(s, lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps) for s in stores]

    frozen_before = None
    if not provider.trainable and provider.store is not None:
        frozen_before = provider.store.snapshot()

    def val_loss():
        # Selection signal: error rate for list-max, mean loss for regression.
        # Classifier NLL on held-out surfaces climbs with overconfidence even
        # while the argmax stays right, so it is useless for snapshotting.
        total, count = 0.0, 0
        for s in range(0, len(val_idx), EVAL_BATCH):
            sel = val_idx[s : s + EVAL_BATCH]
            emb, _ = val_embedder.embed(val_data.idx[sel])
            if spec.task == "decode":
                emb = emb[:, 0, :]
            if spec.task == "listmax":
                total += float(np.sum(probe.predict(emb) != val_data.y[sel]))
            else:
                total += probe.loss_only(emb, val_data.y[sel]) * len(sel)
            count += len(sel)
        return total / count

    best = val_loss()
    best_snaps = [s.snapshot() for s in stores]
    history = [best]
    stall = 0
    n_batches = math.ceil(len(tr_idx) / cfg.batch_size)
    check_every = max(1, n_batches // cfg.val_checks_per_epoch)
    stop = False
    for epoch in range(cfg.max_epochs):
        rng.shuffle(tr_idx)
        for b, s in enumerate(range(0, len(tr_idx), cfg.batch_size)):
            sel = tr_idx[s : s + cfg.batch_size]
            emb, hook = embedder.embed(data.idx[sel])
            if spec.task == "decode":
                emb = emb[:, 0, :]
            loss, d_emb = probe.loss_and_backward(emb, data.y[sel])
            if not np.isfinite(loss):
                raise NonFiniteLoss(
                    f"non-finite loss in task {spec.task!r} at step {s} (epoch {epoch})"
                )
            if spec.task == "decode":
                d_emb = d_emb[:, None, :]
            embedder.backward(hook, d_emb)
            for opt in opts:
                opt.step()
            if (b + 1) % check_every == 0 or b + 1 == n_batches:
                v = val_loss()
                history.append(v)
                if v < best:
                    best = v
                    best_snaps = [s_.snapshot() for s_ in stores]
                    stall = 0
                else:
                    stall += 1
                    if stall >= cfg.patience:
                        stop = True
                        break
        if stop:
            break
    for store, snap in zip(stores, best_snaps):
        store.restore(snap)
    if frozen_before is not None:
        for k, v in frozen_before.items():
            if not np.array_equal(v, provider.store.params[k]):
                raise RuntimeError("frozen provider parameters changed during training")
    return TrainedProbe(probe, provider, val_history=history)


def evaluate(trained: TrainedProbe, test_instances) -> MetricResult:
    """Accuracy over the 5 indices (list-max) or RMSE (decode/add)."""
    data = _Encoded(test_instances)
    if data.task != trained.probe.spec.task:
        raise ValueError("test instances do not match the probe's task")
    _check_coverage(trained.provider, data.tokens)
    embedder = _BatchEmbedder(trained.provider, data.tokens)
    preds = []
    for s in range(0, len(data), EVAL_BATCH):
        emb, _ = embedder.embed(data.idx[s : s + EVAL_BATCH])
        if data.task == "decode":
            emb = emb[:, 0, :]
        preds.append(trained.probe.predict(emb))
    pred = np.concatenate(preds)
    if data.task == "listmax":
        return MetricResult("accuracy5", float(np.mean(pred == data.y)), len(data))
    rmse = float(np.sqrt(np.mean((pred - data.y) ** 2)))
    return MetricResult("rmse", rmse, len(data))


def predict_sweep(trained: TrainedProbe, values, fmt: NumberFormat, train_range) -> list:
    """Decoding-probe predictions over arbitrary values.

    Returns (value, prediction, in_train_range) rows; values the provider
    cannot embed are skipped.  ``train_range`` is the (lo, hi) of values the
    probe was trained on.
    """
    if trained.probe.spec.task not in ("decode", "add"):
        raise ValueError("prediction sweeps require a regression probe")
    lo, hi = train_range
    rows = []
    tokens = []
    kept = []
    from .numeral import FormatRangeError

    for v in values:
        try:
            tok = make_token(int(v), fmt)
        except FormatRangeError:
            continue
        if trained.provider.covers(tok):
            tokens.append(tok)
            kept.append(int(v))
    for s in range(0, len(tokens), EVAL_BATCH):
        chunk = tokens[s : s + EVAL_BATCH]
        emb, _ = trained.provider.forward(chunk)
        pred = trained.probe.predict(emb)
        for v, p in zip(kept[s : s + EVAL_BATCH], pred):
            rows.append((v, float(p), lo <= v <= hi))
    return rows
