"""Numpy implementations of the hot array kernels.

This is the fallback backend; ``embedhalluc._ckernels`` provides the
compiled equivalents with identical signatures. Everything works on
C-contiguous float64 arrays.
"""

import numpy as np

BACKEND = "numpy"


def leaky_relu(x, slope):
    """Return (y, mask) where y = max(x, slope*x) and mask = dy/dx."""
    mask = np.where(x > 0.0, 1.0, slope)
    return x * mask, mask


def adam_update(param, grad, m, v, t, lr, beta1, beta2, eps):
    """Bias-corrected Adam step, updating param, m and v in place."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    mhat = m / (1.0 - beta1**t)
    vhat = v / (1.0 - beta2**t)
    param -= lr * mhat / (np.sqrt(vhat) + eps)


def scatter_add_rows(out, idx, rows):
    """out[idx[i]] += rows[i], accumulating over repeated indices."""
    np.add.at(out, idx, rows)


def softmax_rows(x):
    """Row-wise softmax, stabilized by max subtraction."""
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def logsumexp_rows(x):
    """Row-wise log(sum(exp(x))), stabilized by max subtraction."""
    mx = x.max(axis=1)
    return mx + np.log(np.exp(x - mx[:, None]).sum(axis=1))
