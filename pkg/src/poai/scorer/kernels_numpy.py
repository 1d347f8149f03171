"""Vectorized numpy kernels for the capability scorer network.

The network is three valid convolutions followed by two dense layers on
a 3x3x1 input:

    3x3x1 -> conv 2x2 x8 -> relu -> conv 2x2 x16 -> relu
          -> conv 1x1 x16 -> relu -> dense 16->8 -> relu -> dense 8->1

On a 3x3 input every convolution collapses to a matrix product against
an unrolled patch matrix, so both passes are expressed as a short chain
of matmuls. Weights arrive already reshaped to their matmul form:
w1 (4, 8), w2 (32, 16), w3 (16, 16), w4 (16, 8), w5 (8, 1).
"""

import numpy as np

# Flat 3x3 indices of the four 2x2 patches (row-major patch order).
_PATCH_COLS = np.array(
    [
        [0, 1, 3, 4],
        [1, 2, 4, 5],
        [3, 4, 6, 7],
        [4, 5, 7, 8],
    ]
)


def _patches(x: np.ndarray) -> np.ndarray:
    return x.reshape(-1, 9)[:, _PATCH_COLS]  # (n, 4, 4)


def forward(x, w1, b1, w2, b2, w3, b3, w4, b4, w5, b5):
    """Raw network outputs for a batch, shape (n,)."""
    n = x.shape[0]
    a1 = np.maximum(_patches(x) @ w1 + b1, 0.0)          # (n, 4, 8)
    a2 = np.maximum(a1.reshape(n, 32) @ w2 + b2, 0.0)    # (n, 16)
    a3 = np.maximum(a2 @ w3 + b3, 0.0)                   # (n, 16)
    a4 = np.maximum(a3 @ w4 + b4, 0.0)                   # (n, 8)
    return (a4 @ w5)[:, 0] + b5[0]


def mse_and_grads(x, t, w1, b1, w2, b2, w3, b3, w4, b4, w5, b5):
    """Mean squared error against targets ``t`` and its parameter gradients.

    Returns (mse, gw1, gb1, gw2, gb2, gw3, gb3, gw4, gb4, gw5, gb5)
    with gradient shapes matching the weight arguments.
    """
    n = x.shape[0]
    p = _patches(x)
    z1 = p @ w1 + b1
    a1 = np.maximum(z1, 0.0)
    a1f = a1.reshape(n, 32)
    z2 = a1f @ w2 + b2
    a2 = np.maximum(z2, 0.0)
    z3 = a2 @ w3 + b3
    a3 = np.maximum(z3, 0.0)
    z4 = a3 @ w4 + b4
    a4 = np.maximum(z4, 0.0)
    preds = (a4 @ w5)[:, 0] + b5[0]

    diff = preds - t
    mse = float(np.mean(diff * diff))

    d5 = (2.0 / n) * diff                                # (n,)
    gw5 = a4.T @ d5[:, None]
    gb5 = np.array([d5.sum()])
    dz4 = (d5[:, None] * w5[:, 0]) * (z4 > 0.0)
    gw4 = a3.T @ dz4
    gb4 = dz4.sum(axis=0)
    dz3 = (dz4 @ w4.T) * (z3 > 0.0)
    gw3 = a2.T @ dz3
    gb3 = dz3.sum(axis=0)
    dz2 = (dz3 @ w3.T) * (z2 > 0.0)
    gw2 = a1f.T @ dz2
    gb2 = dz2.sum(axis=0)
    dz1 = (dz2 @ w2.T).reshape(n, 4, 8) * (z1 > 0.0)
    gw1 = np.tensordot(p, dz1, axes=([0, 1], [0, 1]))
    gb1 = dz1.sum(axis=(0, 1))
    return mse, gw1, gb1, gw2, gb2, gw3, gb3, gw4, gb4, gw5, gb5
