"""Numba-compiled kernels for the capability scorer network.

Same contract as :mod:`poai.scorer.kernels_numpy`, written as explicit
per-sample loops so the whole batch step runs as one compiled call.
The two implementations are independent and must agree to float64
round-off; the test suite checks that.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def forward(x, w1, b1, w2, b2, w3, b3, w4, b4, w5, b5):
    n = x.shape[0]
    out = np.empty(n)
    a1 = np.empty(32)
    a2 = np.empty(16)
    a3 = np.empty(16)
    a4 = np.empty(8)
    for m in range(n):
        for pos in range(4):
            oi = pos >> 1
            oj = pos & 1
            for o in range(8):
                s = b1[o]
                for k in range(4):
                    s += x[m, oi + (k >> 1), oj + (k & 1)] * w1[k, o]
                a1[pos * 8 + o] = s if s > 0.0 else 0.0
        for o in range(16):
            s = b2[o]
            for k in range(32):
                s += a1[k] * w2[k, o]
            a2[o] = s if s > 0.0 else 0.0
        for o in range(16):
            s = b3[o]
            for k in range(16):
                s += a2[k] * w3[k, o]
            a3[o] = s if s > 0.0 else 0.0
        for o in range(8):
            s = b4[o]
            for k in range(16):
                s += a3[k] * w4[k, o]
            a4[o] = s if s > 0.0 else 0.0
        s = b5[0]
        for k in range(8):
            s += a4[k] * w5[k, 0]
        out[m] = s
    return out


@njit(cache=True)
def mse_and_grads(x, t, w1, b1, w2, b2, w3, b3, w4, b4, w5, b5):
    n = x.shape[0]
    gw1 = np.zeros((4, 8))
    gb1 = np.zeros(8)
    gw2 = np.zeros((32, 16))
    gb2 = np.zeros(16)
    gw3 = np.zeros((16, 16))
    gb3 = np.zeros(16)
    gw4 = np.zeros((16, 8))
    gb4 = np.zeros(8)
    gw5 = np.zeros((8, 1))
    gb5 = np.zeros(1)

    p = np.empty((4, 4))
    z1 = np.empty(32)
    a1 = np.empty(32)
    z2 = np.empty(16)
    a2 = np.empty(16)
    z3 = np.empty(16)
    a3 = np.empty(16)
    z4 = np.empty(8)
    a4 = np.empty(8)
    d4 = np.empty(8)
    d3 = np.empty(16)
    d2 = np.empty(16)
    d1 = np.empty(32)

    mse = 0.0
    for m in range(n):
        for pos in range(4):
            oi = pos >> 1
            oj = pos & 1
            for k in range(4):
                p[pos, k] = x[m, oi + (k >> 1), oj + (k & 1)]
        for pos in range(4):
            for o in range(8):
                s = b1[o]
                for k in range(4):
                    s += p[pos, k] * w1[k, o]
                z1[pos * 8 + o] = s
                a1[pos * 8 + o] = s if s > 0.0 else 0.0
        for o in range(16):
            s = b2[o]
            for k in range(32):
                s += a1[k] * w2[k, o]
            z2[o] = s
            a2[o] = s if s > 0.0 else 0.0
        for o in range(16):
            s = b3[o]
            for k in range(16):
                s += a2[k] * w3[k, o]
            z3[o] = s
            a3[o] = s if s > 0.0 else 0.0
        for o in range(8):
            s = b4[o]
            for k in range(16):
                s += a3[k] * w4[k, o]
            z4[o] = s
            a4[o] = s if s > 0.0 else 0.0
        pred = b5[0]
        for k in range(8):
            pred += a4[k] * w5[k, 0]

        diff = pred - t[m]
        mse += diff * diff
        d5 = 2.0 * diff / n

        gb5[0] += d5
        for k in range(8):
            gw5[k, 0] += a4[k] * d5
            d4[k] = w5[k, 0] * d5 if z4[k] > 0.0 else 0.0
        for k in range(8):
            gb4[k] += d4[k]
            for j in range(16):
                gw4[j, k] += a3[j] * d4[k]
        for j in range(16):
            s = 0.0
            for k in range(8):
                s += w4[j, k] * d4[k]
            d3[j] = s if z3[j] > 0.0 else 0.0
        for j in range(16):
            gb3[j] += d3[j]
            for i in range(16):
                gw3[i, j] += a2[i] * d3[j]
        for i in range(16):
            s = 0.0
            for j in range(16):
                s += w3[i, j] * d3[j]
            d2[i] = s if z2[i] > 0.0 else 0.0
        for i in range(16):
            gb2[i] += d2[i]
            for k in range(32):
                gw2[k, i] += a1[k] * d2[i]
        for k in range(32):
            s = 0.0
            for i in range(16):
                s += w2[k, i] * d2[i]
            d1[k] = s if z1[k] > 0.0 else 0.0
        for pos in range(4):
            for o in range(8):
                g = d1[pos * 8 + o]
                gb1[o] += g
                for k in range(4):
                    gw1[k, o] += p[pos, k] * g

    mse /= n
    return mse, gw1, gb1, gw2, gb2, gw3, gb3, gw4, gb4, gw5, gb5
