"""Small neural-net layers on top of the autodiff core."""

import numpy as np

from embedhalluc import autodiff as ad
from embedhalluc.autodiff import Tensor
from embedhalluc.errors import DegenerateBatchError, DimensionError


class Linear:
    """Affine map x @ w + b with He-scaled normal init."""

    def __init__(self, in_dim, out_dim, rng):
        std = np.sqrt(2.0 / in_dim)
        self.w = Tensor(rng.normal(0.0, std, (in_dim, out_dim)), requires_grad=True)
        self.b = Tensor(np.zeros(out_dim), requires_grad=True)

    def __call__(self, x):
        return ad.add(ad.matmul(x, self.w), self.b)

    def named_parameters(self, prefix):
        return [(prefix + ".w", self.w), (prefix + ".b", self.b)]


class BatchNorm1d:
    """Column-wise batch normalization with running statistics.

    Train mode normalizes by the batch mean and population variance and
    folds them into the running estimates; eval mode normalizes by the
    running estimates. A variance floor keeps constant columns finite.
    """

    def __init__(self, dim, eps=1e-5, momentum=0.1):
        self.gamma = Tensor(np.ones(dim), requires_grad=True)
        self.beta = Tensor(np.zeros(dim), requires_grad=True)
        self.running_mean = np.zeros(dim)
        self.running_var = np.ones(dim)
        self.eps = eps
        self.momentum = momentum

    def __call__(self, x, training):
        if training:
            if x.shape[0] < 2:
                raise DegenerateBatchError(
                    f"batch norm needs at least 2 rows in train mode, got {x.shape[0]}"
                )
            mu = ad.mean(x, axis=0)
            var = ad.mean(ad.pow_const(ad.sub(x, mu), 2.0), axis=0)
            m = self.momentum
            self.running_mean = (1.0 - m) * self.running_mean + m * mu.data
            self.running_var = (1.0 - m) * self.running_var + m * var.data
        else:
            mu = Tensor(self.running_mean)
            var = Tensor(self.running_var)
        xhat = ad.div(ad.sub(x, mu), ad.sqrt(ad.add(var, Tensor(self.eps))))
        return ad.add(ad.mul(self.gamma, xhat), self.beta)

    def named_parameters(self, prefix):
        return [(prefix + ".gamma", self.gamma), (prefix + ".beta", self.beta)]

    def named_buffers(self, prefix):
        return [
            (prefix + ".running_mean", self.running_mean),
            (prefix + ".running_var", self.running_var),
        ]


class Embedding:
    """Token id to vector lookup. The pad row stays at zero."""

    def __init__(self, vocab_size, dim, rng, pad_id=None):
        std = 1.0 / np.sqrt(dim)
        table = rng.normal(0.0, std, (vocab_size, dim))
        if pad_id is not None:
            table[pad_id] = 0.0
        self.table = Tensor(table, requires_grad=True)
        self.pad_id = pad_id

    def __call__(self, ids):
        return ad.gather_rows(self.table, ids)

    def zero_pad_grad(self):
        if self.pad_id is not None and self.table.grad is not None:
            self.table.grad[self.pad_id] = 0.0

    def named_parameters(self, prefix):
        return [(prefix + ".table", self.table)]


def collect_named(parts):
    """Merge named_parameters() of several (prefix, layer) pairs."""
    out = []
    for prefix, layer in parts:
        out.extend(layer.named_parameters(prefix))
    return out


def load_named(named_params, arrays):
    """Copy checkpoint arrays into parameters, validating shapes."""
    for name, tensor in named_params:
        if name not in arrays:
            raise KeyError(f"checkpoint is missing parameter {name}")
        arr = np.asarray(arrays[name], dtype=np.float64)
        if arr.shape != tensor.data.shape:
            raise DimensionError(
                f"{name}: checkpoint shape {arr.shape} vs model {tensor.data.shape}"
            )
        tensor.data[...] = arr
