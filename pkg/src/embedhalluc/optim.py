"""Adam with bias correction, operating on autodiff leaf tensors."""

import numpy as np

from embedhalluc import kernels
from embedhalluc.errors import DimensionError


class AdamState:
    """Per-parameter first/second moment accumulators and step counter."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]


def adam_step(params, grads, state):
    """One bias-corrected Adam update; mutates params and state in place."""
    state.t += 1
    for i, (p, g) in enumerate(zip(params, grads)):
        if g is None:
            continue
        if g.shape != p.data.shape:
            raise DimensionError(
                f"grad shape {g.shape} does not match param shape {p.data.shape}"
            )
        kernels.adam_update(
            p.data,
            np.ascontiguousarray(g),
            state.m[i],
            state.v[i],
            state.t,
            state.lr,
            state.beta1,
            state.beta2,
            state.eps,
        )


class Adam:
    """Optimizer bound to a parameter list; reads grads from ``.grad``."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.state = AdamState(self.params, lr, beta1, beta2, eps)

    def step(self):
        adam_step(self.params, [p.grad for p in self.params], self.state)

    def zero_grad(self):
        for p in self.params:
            p.grad = None
