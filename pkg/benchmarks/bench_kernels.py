"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the LSTM and conv/max-pool forward+backward passes on probe-sized
workloads with both backends and prints the speedup.  Run:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from numprobe.neural import _kernels_np

try:
    from numprobe import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, repeats=20):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def bench_lstm(mod, N=32, T=5, D=512, H=100):
    rng = np.random.Generator(np.random.PCG64(0))
    x = rng.normal(size=(N, T, D))
    Wx = rng.normal(size=(D, 4 * H), scale=0.05)
    Wh = rng.normal(size=(H, 4 * H), scale=0.05)
    b = np.zeros(4 * H)
    d_h = rng.normal(size=(N, T, H))

    h_all, c_all, gates = mod.lstm_forward(x, Wx, Wh, b)
    fwd = _time(lambda: mod.lstm_forward(x, Wx, Wh, b))
    bwd = _time(lambda: mod.lstm_backward(x, Wx, Wh, h_all, c_all, gates, d_h))
    return fwd, bwd


def bench_conv(mod, N=32, L=7, C=20, F=256, width=7):
    rng = np.random.Generator(np.random.PCG64(0))
    emb = rng.normal(size=(N, L, C))
    W = rng.normal(size=(width * C, F), scale=0.05)
    b = np.zeros(F)
    out, am = mod.conv_relu_maxpool_forward(emb, W, b, width)
    d_out = rng.normal(size=out.shape)

    fwd = _time(lambda: mod.conv_relu_maxpool_forward(emb, W, b, width), repeats=100)
    bwd = _time(lambda: mod.conv_relu_maxpool_backward(emb, W, out, am, d_out, width),
                repeats=100)
    return fwd, bwd


def main():
    rows = []
    for name, fn in [("lstm", bench_lstm), ("conv", bench_conv)]:
        np_fwd, np_bwd = fn(_kernels_np)
        if _ckernels is None:
            rows.append((name, np_fwd, np_bwd, None, None))
        else:
            c_fwd, c_bwd = fn(_ckernels)
            rows.append((name, np_fwd, np_bwd, c_fwd, c_bwd))

    print(f"{'kernel':8s} {'numpy fwd':>12s} {'numpy bwd':>12s} "
          f"{'compiled fwd':>14s} {'compiled bwd':>14s} {'speedup':>9s}")
    for name, nf, nb, cf, cb in rows:
        if cf is None:
            print(f"{name:8s} {nf*1e3:10.3f}ms {nb*1e3:10.3f}ms "
                  f"{'(not built)':>14s} {'':>14s}")
        else:
            speedup = (nf + nb) / (cf + cb)
            print(f"{name:8s} {nf*1e3:10.3f}ms {nb*1e3:10.3f}ms "
                  f"{cf*1e3:12.3f}ms {cb*1e3:12.3f}ms {speedup:8.2f}x")


if __name__ == "__main__":
    main()
