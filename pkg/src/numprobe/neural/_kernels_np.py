"""Pure-numpy reference kernels for the two hot inner loops: the LSTM time
loop and the char-CNN convolution + max-pool.  A compiled Cython twin of this
module (``numprobe._ckernels``) is preferred at import time when available;
both expose identical signatures and are cross-checked in the tests.

Gate column layout in all LSTM arrays: [input, forget, candidate, output],
each a block of H columns.  ``gates`` stores post-activation values.
"""

import numpy as np


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def lstm_forward(x, Wx, Wh, b):
    """Run an LSTM over a batch of sequences.

    x: (N, T, D); Wx: (D, 4H); Wh: (H, 4H); b: (4H,).
    Returns (h_all (N,T,H), c_all (N,T,H), gates (N,T,4H)).
    """
    N, T, D = x.shape
    H = Wh.shape[0]
    h_all = np.empty((N, T, H))
    c_all = np.empty((N, T, H))
    gates = np.empty((N, T, 4 * H))
    h = np.zeros((N, H))
    c = np.zeros((N, H))
    xW = (x.reshape(N * T, D) @ Wx).reshape(N, T, 4 * H)
    for t in range(T):
        pre = xW[:, t] + h @ Wh + b
        i = _sigmoid(pre[:, :H])
        f = _sigmoid(pre[:, H : 2 * H])
        g = np.tanh(pre[:, 2 * H : 3 * H])
        o = _sigmoid(pre[:, 3 * H :])
        c = f * c + i * g
        h = o * np.tanh(c)
        gates[:, t, :H] = i
        gates[:, t, H : 2 * H] = f
        gates[:, t, 2 * H : 3 * H] = g
        gates[:, t, 3 * H :] = o
        c_all[:, t] = c
        h_all[:, t] = h
    return h_all, c_all, gates


def lstm_backward(x, Wx, Wh, h_all, c_all, gates, d_h_all):
    """Backward pass matching :func:`lstm_forward`.

    d_h_all: (N, T, H) upstream gradient on every hidden state.
    Returns (dx, dWx, dWh, db).
    """
    N, T, D = x.shape
    H = Wh.shape[0]
    d_pre_all = np.empty((N, T, 4 * H))
    dh_next = np.zeros((N, H))
    dc_next = np.zeros((N, H))
    for t in range(T - 1, -1, -1):
        i = gates[:, t, :H]
        f = gates[:, t, H : 2 * H]
        g = gates[:, t, 2 * H : 3 * H]
        o = gates[:, t, 3 * H :]
        c_prev = c_all[:, t - 1] if t > 0 else np.zeros((N, H))
        tanh_c = np.tanh(c_all[:, t])

        dh = d_h_all[:, t] + dh_next
        do = dh * tanh_c
        dc = dh * o * (1.0 - tanh_c * tanh_c) + dc_next
        d_pre = d_pre_all[:, t]
        d_pre[:, :H] = dc * g * i * (1.0 - i)
        d_pre[:, H : 2 * H] = dc * c_prev * f * (1.0 - f)
        d_pre[:, 2 * H : 3 * H] = dc * i * (1.0 - g * g)
        d_pre[:, 3 * H :] = do * o * (1.0 - o)

        dh_next = d_pre @ Wh.T
        dc_next = dc * f

    h_prev_all = np.concatenate([np.zeros((N, 1, H)), h_all[:, :-1]], axis=1)
    flat = d_pre_all.reshape(N * T, 4 * H)
    dWx = x.reshape(N * T, D).T @ flat
    dWh = h_prev_all.reshape(N * T, H).T @ flat
    db = flat.sum(axis=0)
    dx = (flat @ Wx.T).reshape(N, T, D)
    return dx, dWx, dWh, db


def _patches(emb, width):
    """im2col view: (N, L, C) -> (N, P, width*C) with P = L - width + 1."""
    N, L, C = emb.shape
    P = L - width + 1
    s0, s1, s2 = emb.strides
    view = np.lib.stride_tricks.as_strided(
        emb, shape=(N, P, width, C), strides=(s0, s1, s1, s2), writeable=False
    )
    return view.reshape(N, P, width * C)


def conv_relu_maxpool_forward(emb, W, b, width):
    """One filter bank: convolve, ReLU, max-pool over positions.

    emb: (N, L, C); W: (width*C, F); b: (F,).  Requires L >= width.
    Returns (out (N,F), argmax (N,F) int64 position of the first maximum).
    """
    pat = _patches(emb, width)
    z = pat @ W + b
    r = np.maximum(z, 0.0)
    am = np.argmax(r, axis=1)
    out = np.take_along_axis(r, am[:, None, :], axis=1)[:, 0, :]
    return out, am


def conv_relu_maxpool_backward(emb, W, out, argmax, d_out, width):
    """Backward pass matching :func:`conv_relu_maxpool_forward`.

    Gradient is routed to the first maximal position; positions whose pooled
    output is exactly 0 (ReLU-clipped) receive no gradient.
    Returns (d_emb, dW, db).
    """
    N, L, C = emb.shape
    P = L - width + 1
    F = W.shape[1]
    pat = _patches(emb, width)
    d_pooled = np.where(out > 0.0, d_out, 0.0)
    dz = np.zeros((N, P, F))
    np.put_along_axis(dz, argmax[:, None, :], d_pooled[:, None, :], axis=1)
    dW = pat.reshape(N * P, width * C).T @ dz.reshape(N * P, F)
    db = dz.sum(axis=(0, 1))
    d_pat = (dz @ W.T).reshape(N, P, width, C)
    d_emb = np.zeros_like(emb)
    for p in range(P):
        d_emb[:, p : p + width, :] += d_pat[:, p]
    return d_emb, dW, db
