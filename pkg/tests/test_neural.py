"""Gradient checks, optimizer behaviour, loss heads, and backend parity."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from numprobe.neural import _kernels_np, kernels
from numprobe.neural.gradcheck import MODEL_FAMILIES, run_all
from numprobe.neural.layers import softmax, softmax_nll, softmax_nll_backward
from numprobe.neural.params import Adam, ParamStore

try:
    from numprobe import _ckernels
except ImportError:
    _ckernels = None

GRAD_TOL = 1e-4


@pytest.mark.parametrize("family", sorted(MODEL_FAMILIES))
def test_gradcheck_per_family(family):
    assert MODEL_FAMILIES[family](seed=0) < GRAD_TOL


def test_gradcheck_alternate_seed():
    assert max(run_all(seed=1).values()) < GRAD_TOL


def test_adam_first_step_moves_by_lr():
    store = ParamStore()
    store.add("w", np.array([0.0]))
    opt = Adam(store, lr=0.01)
    store.grads["w"][...] = 1.0
    opt.step()
    # first bias-corrected step is -lr up to the eps correction
    assert store.params["w"][0] == pytest.approx(-0.01, rel=1e-6)
    assert store.grads["w"][0] == 0.0  # gradients cleared after the step


def test_adam_zero_gradient_leaves_params():
    store = ParamStore()
    store.add("w", np.array([1.5, -2.0]))
    Adam(store, lr=0.1).step()
    assert np.array_equal(store.params["w"], [1.5, -2.0])


def test_adam_descends_convex_quadratic():
    store = ParamStore()
    w = store.add("w", np.array([5.0, -3.0]))
    opt = Adam(store, lr=0.05)
    losses = []
    for _ in range(400):
        losses.append(float(w @ w))
        store.grads["w"][...] = 2.0 * w
        opt.step()
    assert losses[-1] < 1e-3
    assert losses[-1] < losses[0]


@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_softmax_rows_are_distributions(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    logits = rng.normal(scale=5.0, size=(4, 5))
    p = softmax(logits)
    assert np.all(p > 0)
    assert np.allclose(p.sum(axis=1), 1.0)
    # invariant under per-row shifts
    shifted = softmax(logits + rng.normal(size=(4, 1)))
    assert np.allclose(p, shifted)


def test_softmax_nll_gradient_rows_sum_to_zero():
    rng = np.random.Generator(np.random.PCG64(0))
    logits = rng.normal(size=(6, 5))
    labels = rng.integers(0, 5, size=6)
    loss, probs = softmax_nll(logits, labels)
    assert loss > 0
    d = softmax_nll_backward(probs, labels)
    assert np.allclose(d.sum(axis=1), 0.0)


def test_param_store_snapshot_restore():
    store = ParamStore()
    w = store.add("w", np.array([1.0, 2.0]))
    snap = store.snapshot()
    w += 10.0
    store.restore(snap)
    assert np.array_equal(store.params["w"], [1.0, 2.0])


def test_param_store_rejects_duplicates():
    store = ParamStore()
    store.add("w", np.zeros(2))
    with pytest.raises(ValueError):
        store.add("w", np.zeros(2))


def test_param_store_text_round_trip(tmp_path):
    rng = np.random.Generator(np.random.PCG64(3))
    a = ParamStore()
    a.add("x", rng.normal(size=(3, 4)))
    a.add("y", rng.normal(size=5))
    path = tmp_path / "ckpt.txt"
    a.save_text(path)
    b = ParamStore()
    b.add("x", np.zeros((3, 4)))
    b.add("y", np.zeros(5))
    b.load_text(path)
    for k in a.params:
        assert np.array_equal(a.params[k], b.params[k])


@pytest.mark.skipif(_ckernels is None, reason="compiled backend not built")
def test_lstm_backend_parity():
    rng = np.random.Generator(np.random.PCG64(0))
    N, T, D, H = 5, 7, 6, 4
    x = rng.normal(size=(N, T, D))
    Wx = rng.normal(size=(D, 4 * H), scale=0.2)
    Wh = rng.normal(size=(H, 4 * H), scale=0.2)
    b = rng.normal(size=4 * H, scale=0.1)
    d_h = rng.normal(size=(N, T, H))
    out_np = _kernels_np.lstm_forward(x, Wx, Wh, b)
    out_c = _ckernels.lstm_forward(x, Wx, Wh, b)
    for a, c in zip(out_np, out_c):
        assert np.allclose(a, c, atol=1e-12)
    back_np = _kernels_np.lstm_backward(x, Wx, Wh, *out_np, d_h)
    back_c = _ckernels.lstm_backward(x, Wx, Wh, *out_c, d_h)
    for a, c in zip(back_np, back_c):
        assert np.allclose(a, c, atol=1e-12)


@pytest.mark.skipif(_ckernels is None, reason="compiled backend not built")
@pytest.mark.parametrize("width", [1, 3, 7])
def test_conv_backend_parity(width):
    rng = np.random.Generator(np.random.PCG64(1))
    N, L, C, F = 6, 7, 5, 8
    emb = rng.normal(size=(N, L, C))
    W = rng.normal(size=(width * C, F), scale=0.3)
    b = rng.normal(size=F, scale=0.1)
    out_np, am_np = _kernels_np.conv_relu_maxpool_forward(emb, W, b, width)
    out_c, am_c = _ckernels.conv_relu_maxpool_forward(emb, W, b, width)
    assert np.allclose(out_np, out_c, atol=1e-12)
    assert np.array_equal(am_np, am_c)
    d_out = rng.normal(size=out_np.shape)
    back_np = _kernels_np.conv_relu_maxpool_backward(emb, W, out_np, am_np, d_out, width)
    back_c = _ckernels.conv_relu_maxpool_backward(emb, W, out_c, am_c, d_out, width)
    for a, c in zip(back_np, back_c):
        assert np.allclose(a, c, atol=1e-12)


def test_backend_selection_reports_a_backend():
    assert kernels.BACKEND in ("python", "compiled")
