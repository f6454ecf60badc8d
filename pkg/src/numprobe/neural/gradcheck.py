"""Central finite-difference gradient checking for every model family.

The checker perturbs each parameter element by +-eps, recomputes the loss,
and compares against the analytic gradient.  This is the independent oracle
for all hand-derived backward passes.
"""

from __future__ import annotations

import numpy as np

from .layers import Dense, LstmLayer, Mlp3, mse, mse_backward, softmax_nll, softmax_nll_backward
from .params import ParamStore

EPS = 1e-5


def finite_diff_check(stores, loss_fn, eps: float = EPS) -> float:
    """Max relative error between analytic and numerical gradients.

    ``loss_fn`` runs a forward+backward pass, accumulating gradients into the
    given stores, and returns the scalar loss.
    """
    if isinstance(stores, ParamStore):
        stores = [stores]
    for s in stores:
        s.zero_grads()
    loss_fn()
    analytic = [{k: g.copy() for k, g in s.grads.items()} for s in stores]
    for s in stores:
        s.zero_grads()

    max_rel = 0.0
    for s, ana in zip(stores, analytic):
        for name, p in s.params.items():
            flat = p.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                lp = loss_fn()
                flat[i] = orig - eps
                lm = loss_fn()
                flat[i] = orig
                num = (lp - lm) / (2.0 * eps)
                a = ana[name].ravel()[i]
                rel = abs(a - num) / max(abs(a), abs(num), 1e-6)
                max_rel = max(max_rel, rel)
            for st in stores:
                st.zero_grads()
    return max_rel


def check_linear(seed: int) -> float:
    rng = np.random.Generator(np.random.PCG64(seed))
    store = ParamStore()
    layer = Dense(store, "lin", 4, 1, rng)
    x = rng.normal(size=(6, 4))
    t = rng.normal(size=6)

    def loss_fn():
        y, cache = layer.forward(x)
        loss, diff = mse(y[:, 0], t)
        layer.backward(cache, mse_backward(diff)[:, None])
        return loss

    return finite_diff_check(store, loss_fn)


def check_mlp3(seed: int) -> float:
    rng = np.random.Generator(np.random.PCG64(seed))
    store = ParamStore()
    net = Mlp3(store, "mlp", 3, (5, 4), 1, rng)
    x = rng.normal(size=(7, 3))
    t = rng.normal(size=7)

    def loss_fn():
        y, cache = net.forward(x)
        loss, diff = mse(y[:, 0], t)
        net.backward(cache, mse_backward(diff)[:, None])
        return loss

    return finite_diff_check(store, loss_fn)


def check_lstm_classifier(seed: int) -> float:
    """5-step LSTM with a shared per-position logit projection and NLL."""
    rng = np.random.Generator(np.random.PCG64(seed))
    store = ParamStore()
    lstm = LstmLayer(store, "lstm", 3, 6, rng)
    proj = Dense(store, "proj", 6, 1, rng)
    x = rng.normal(size=(4, 5, 3))
    labels = rng.integers(0, 5, size=4)

    def loss_fn():
        h, lc = lstm.forward(x)
        N, T, H = h.shape
        logits, pc = proj.forward(h.reshape(N * T, H))
        loss, probs = softmax_nll(logits.reshape(N, T), labels)
        d_logits = softmax_nll_backward(probs, labels)
        d_h = proj.backward(pc, d_logits.reshape(N * T, 1)).reshape(N, T, H)
        lstm.backward(lc, d_h)
        return loss

    return finite_diff_check(store, loss_fn)


def check_char_cnn(seed: int) -> float:
    """Char-CNN encoder through max-pool into a linear regression head.

    Inputs are jittered away from pooling ties: exact ties route the
    subgradient to the first maximal position, where finite differences
    disagree by construction.
    """
    from ..embed import CharCNNEncoder
    from ..numeral import NumberFormat, make_token

    rng = np.random.Generator(np.random.PCG64(seed))
    # dense filters: the sparse default zeroes most weights, leaving pooled
    # activations at jitter scale where finite differences flip the argmax
    enc = CharCNNEncoder(seed=seed, trainable=True, char_dim=4, filters=2,
                         widths=(1, 2, 3), filter_density=1.0)
    # tie-avoidance jitter on all encoder parameters
    for p in enc.store.params.values():
        p += rng.normal(0.0, 1e-3, size=p.shape)
    store = ParamStore()
    head = Dense(store, "head", enc.dim, 1, rng)
    # equal-length tokens: the pad embedding row is pinned at zero, which
    # finite differences would otherwise flag
    tokens = [make_token(v, NumberFormat.DIGITS) for v in (592, 417, 803, 126)]
    t = rng.normal(size=len(tokens))

    def loss_fn():
        e, ec = enc.forward(tokens)
        y, hc = head.forward(e)
        loss, diff = mse(y[:, 0], t)
        d_e = head.backward(hc, mse_backward(diff)[:, None])
        enc.backward(ec, d_e)
        return loss

    return finite_diff_check([store, enc.store], loss_fn)


def check_char_lstm(seed: int) -> float:
    from ..embed import CharLSTMEncoder
    from ..numeral import NumberFormat, make_token

    rng = np.random.Generator(np.random.PCG64(seed))
    enc = CharLSTMEncoder(seed=seed, trainable=True, char_dim=3, hidden=4)
    store = ParamStore()
    head = Dense(store, "head", enc.dim, 1, rng)
    tokens = [make_token(v, NumberFormat.WORDS) for v in (7, 40, 60)]  # equal lengths
    t = rng.normal(size=len(tokens))

    def loss_fn():
        e, ec = enc.forward(tokens)
        y, hc = head.forward(e)
        loss, diff = mse(y[:, 0], t)
        d_e = head.backward(hc, mse_backward(diff)[:, None])
        enc.backward(ec, d_e)
        return loss

    return finite_diff_check([store, enc.store], loss_fn)


MODEL_FAMILIES = {
    "linear": check_linear,
    "mlp3": check_mlp3,
    "lstm_classifier": check_lstm_classifier,
    "char_cnn": check_char_cnn,
    "char_lstm": check_char_lstm,
}


def run_all(seed: int = 0) -> dict:
    """Max relative gradient error per model family."""
    return {name: fn(seed) for name, fn in MODEL_FAMILIES.items()}
