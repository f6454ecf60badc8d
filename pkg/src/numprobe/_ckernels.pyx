# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the pure-numpy kernels in neural/_kernels_np.py.

The sequential LSTM time loop and the conv/max-pool kernels spend most of
their time in small elementwise sweeps where numpy's per-call overhead
dominates; those sweeps run here as typed C loops.  Large one-shot GEMMs
stay in numpy (BLAS).  Signatures and semantics match the numpy module
exactly; the parity tests hold both to ~1e-12.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()


cdef inline double _sig(double v) nogil:
    if v >= 0.0:
        return 1.0 / (1.0 + exp(-v))
    cdef double e = exp(v)
    return e / (1.0 + e)


def lstm_forward(cnp.ndarray[double, ndim=3] x,
                 cnp.ndarray[double, ndim=2] Wx,
                 cnp.ndarray[double, ndim=2] Wh,
                 cnp.ndarray[double, ndim=1] b):
    cdef Py_ssize_t N = x.shape[0], T = x.shape[1], D = x.shape[2]
    cdef Py_ssize_t H = Wh.shape[0]
    cdef cnp.ndarray[double, ndim=3] h_all = np.empty((N, T, H))
    cdef cnp.ndarray[double, ndim=3] c_all = np.empty((N, T, H))
    cdef cnp.ndarray[double, ndim=3] gates = np.empty((N, T, 4 * H))
    cdef cnp.ndarray[double, ndim=3] xW = \
        np.dot(x.reshape(N * T, D), Wx).reshape(N, T, 4 * H)
    cdef cnp.ndarray[double, ndim=2] h = np.zeros((N, H))
    cdef cnp.ndarray[double, ndim=2] hWh
    cdef double[:, :, ::1] hv = h_all, cv = c_all, gv = gates, xWv = xW
    cdef double[:, ::1] hwv
    cdef double[::1] bv = b
    cdef Py_ssize_t t, n, j
    cdef double pi, pf, pg, po, i_, f_, g_, o_, c_prev, c_new

    for t in range(T):
        hWh = np.dot(h, Wh)
        hwv = hWh
        with nogil:
            for n in range(N):
                for j in range(H):
                    pi = xWv[n, t, j] + hwv[n, j] + bv[j]
                    pf = xWv[n, t, H + j] + hwv[n, H + j] + bv[H + j]
                    pg = xWv[n, t, 2 * H + j] + hwv[n, 2 * H + j] + bv[2 * H + j]
                    po = xWv[n, t, 3 * H + j] + hwv[n, 3 * H + j] + bv[3 * H + j]
                    i_ = _sig(pi)
                    f_ = _sig(pf)
                    g_ = tanh(pg)
                    o_ = _sig(po)
                    c_prev = cv[n, t - 1, j] if t > 0 else 0.0
                    c_new = f_ * c_prev + i_ * g_
                    gv[n, t, j] = i_
                    gv[n, t, H + j] = f_
                    gv[n, t, 2 * H + j] = g_
                    gv[n, t, 3 * H + j] = o_
                    cv[n, t, j] = c_new
                    hv[n, t, j] = o_ * tanh(c_new)
        h = h_all[:, t].copy()
    return h_all, c_all, gates


def lstm_backward(cnp.ndarray[double, ndim=3] x,
                  cnp.ndarray[double, ndim=2] Wx,
                  cnp.ndarray[double, ndim=2] Wh,
                  cnp.ndarray[double, ndim=3] h_all,
                  cnp.ndarray[double, ndim=3] c_all,
                  cnp.ndarray[double, ndim=3] gates,
                  cnp.ndarray[double, ndim=3] d_h_all):
    cdef Py_ssize_t N = x.shape[0], T = x.shape[1], D = x.shape[2]
    cdef Py_ssize_t H = Wh.shape[0]
    cdef cnp.ndarray[double, ndim=3] d_pre_all = np.empty((N, T, 4 * H))
    cdef cnp.ndarray[double, ndim=2] dh_next = np.zeros((N, H))
    cdef cnp.ndarray[double, ndim=2] dc = np.empty((N, H))
    cdef cnp.ndarray[double, ndim=2] dc_next = np.zeros((N, H))
    cdef double[:, :, ::1] gv = gates, cv = c_all, dpv = d_pre_all, dhav = d_h_all
    cdef double[:, ::1] dhnv = dh_next, dcv = dc, dcnv = dc_next
    cdef Py_ssize_t t, n, j
    cdef double i_, f_, g_, o_, c_prev, tc, dh, do, dci

    for t in range(T - 1, -1, -1):
        with nogil:
            for n in range(N):
                for j in range(H):
                    i_ = gv[n, t, j]
                    f_ = gv[n, t, H + j]
                    g_ = gv[n, t, 2 * H + j]
                    o_ = gv[n, t, 3 * H + j]
                    c_prev = cv[n, t - 1, j] if t > 0 else 0.0
                    tc = tanh(cv[n, t, j])
                    dh = dhav[n, t, j] + dhnv[n, j]
                    do = dh * tc
                    dci = dh * o_ * (1.0 - tc * tc) + dcnv[n, j]
                    dpv[n, t, j] = dci * g_ * i_ * (1.0 - i_)
                    dpv[n, t, H + j] = dci * c_prev * f_ * (1.0 - f_)
                    dpv[n, t, 2 * H + j] = dci * i_ * (1.0 - g_ * g_)
                    dpv[n, t, 3 * H + j] = do * o_ * (1.0 - o_)
                    dcv[n, j] = dci * f_
        dh_next = np.dot(d_pre_all[:, t], Wh.T)
        dhnv = dh_next
        dc_next, dc = dc, dc_next
        dcnv = dc_next
        dcv = dc

    h_prev_all = np.concatenate([np.zeros((N, 1, H)), h_all[:, :-1]], axis=1)
    flat = d_pre_all.reshape(N * T, 4 * H)
    dWx = np.dot(x.reshape(N * T, D).T, flat)
    dWh = np.dot(h_prev_all.reshape(N * T, H).T, flat)
    db = flat.sum(axis=0)
    dx = np.dot(flat, Wx.T).reshape(N, T, D)
    return dx, dWx, dWh, db


def conv_relu_maxpool_forward(cnp.ndarray[double, ndim=3] emb,
                              cnp.ndarray[double, ndim=2] W,
                              cnp.ndarray[double, ndim=1] b,
                              Py_ssize_t width):
    cdef Py_ssize_t N = emb.shape[0], L = emb.shape[1], C = emb.shape[2]
    cdef Py_ssize_t P = L - width + 1
    cdef Py_ssize_t F = W.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((N, F))
    cdef cnp.ndarray[cnp.int64_t, ndim=2] am = np.zeros((N, F), dtype=np.int64)
    cdef double[:, :, ::1] ev = emb
    cdef double[:, ::1] Wv = W, ov = out
    cdef double[::1] bv = b
    cdef cnp.int64_t[:, ::1] amv = am
    cdef Py_ssize_t n, p, f, k, c
    cdef double z, r

    with nogil:
        for n in range(N):
            for f in range(F):
                ov[n, f] = -1.0  # any relu output >= 0 beats this
            for p in range(P):
                for f in range(F):
                    z = bv[f]
                    for k in range(width):
                        for c in range(C):
                            z += ev[n, p + k, c] * Wv[k * C + c, f]
                    r = z if z > 0.0 else 0.0
                    if r > ov[n, f]:
                        ov[n, f] = r
                        amv[n, f] = p
    return out, am


def conv_relu_maxpool_backward(cnp.ndarray[double, ndim=3] emb,
                               cnp.ndarray[double, ndim=2] W,
                               cnp.ndarray[double, ndim=2] out,
                               cnp.ndarray[cnp.int64_t, ndim=2] argmax,
                               cnp.ndarray[double, ndim=2] d_out,
                               Py_ssize_t width):
    cdef Py_ssize_t N = emb.shape[0], L = emb.shape[1], C = emb.shape[2]
    cdef Py_ssize_t F = W.shape[1]
    cdef cnp.ndarray[double, ndim=3] d_emb = np.zeros((N, L, C))
    cdef cnp.ndarray[double, ndim=2] dW = np.zeros((width * C, F))
    cdef cnp.ndarray[double, ndim=1] db = np.zeros(F)
    cdef double[:, :, ::1] ev = emb, dev = d_emb
    cdef double[:, ::1] Wv = W, dWv = dW, ov = out, dov = d_out
    cdef double[::1] dbv = db
    cdef cnp.int64_t[:, ::1] amv = argmax
    cdef Py_ssize_t n, p, f, k, c
    cdef double d

    with nogil:
        for n in range(N):
            for f in range(F):
                if ov[n, f] <= 0.0:
                    continue
                d = dov[n, f]
                if d == 0.0:
                    continue
                p = amv[n, f]
                dbv[f] += d
                for k in range(width):
                    for c in range(C):
                        dWv[k * C + c, f] += ev[n, p + k, c] * d
                        dev[n, p + k, c] += Wv[k * C + c, f] * d
    return d_emb, dW, db
