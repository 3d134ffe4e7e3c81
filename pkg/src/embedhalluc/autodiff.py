"""Reverse-mode automatic differentiation on float64 numpy arrays.

Tensors created by operations remember their operands and a
vector-Jacobian product. The VJPs are themselves written with recorded
operations, so gradients returned by :func:`grad` stay attached to the
graph and can be differentiated again (needed for penalties on input
gradients). ``backward`` runs its traversal with recording switched off,
which keeps plain training steps at numpy speed.
"""

import numpy as np

from embedhalluc import kernels
from embedhalluc.errors import CapabilityError, DimensionError, DistributionError

_RECORDING = [True]


class no_grad:
    """Context manager that disables graph recording."""

    def __enter__(self):
        self._prev = _RECORDING[0]
        _RECORDING[0] = False
        return self

    def __exit__(self, *exc):
        _RECORDING[0] = self._prev
        return False


def _as_array(value):
    return np.asarray(value, dtype=np.float64)


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad=False):
        self.data = _as_array(data)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()
        self._vjp = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self):
        return float(self.data)

    def detach(self):
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # arithmetic sugar; all graph logic lives in the module functions
    def __add__(self, other):
        return add(self, _ensure_tensor(other))

    def __radd__(self, other):
        return add(_ensure_tensor(other), self)

    def __sub__(self, other):
        return sub(self, _ensure_tensor(other))

    def __rsub__(self, other):
        return sub(_ensure_tensor(other), self)

    def __mul__(self, other):
        return mul(self, _ensure_tensor(other))

    def __rmul__(self, other):
        return mul(_ensure_tensor(other), self)

    def __truediv__(self, other):
        return div(self, _ensure_tensor(other))

    def __rtruediv__(self, other):
        return div(_ensure_tensor(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return pow_const(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return getitem(self, key)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def swapaxes(self, a, b):
        return swapaxes(self, a, b)

    @property
    def T(self):
        if self.ndim != 2:
            raise DimensionError(f".T needs a 2-d tensor, got shape {self.shape}")
        return swapaxes(self, 0, 1)

    def backward(self):
        backward(self)


def _ensure_tensor(value):
    return value if isinstance(value, Tensor) else Tensor(value)


def _make(data, parents, vjp):
    """Wrap op output, recording parents and vjp when recording is on."""
    out = Tensor(data)
    if _RECORDING[0] and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._vjp = vjp
    return out


def _unbroadcast(g, shape):
    """Sum a broadcast gradient back down to the operand's shape."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = sum_(g, axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = sum_(g, axis=axes, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# primitives


def add(a, b):
    a, b = _ensure_tensor(a), _ensure_tensor(b)

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _make(a.data + b.data, (a, b), vjp)


def sub(a, b):
    a, b = _ensure_tensor(a), _ensure_tensor(b)

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(neg(g), b.shape)

    return _make(a.data - b.data, (a, b), vjp)


def neg(a):
    a = _ensure_tensor(a)
    return _make(-a.data, (a,), lambda g: (neg(g),))


def mul(a, b):
    a, b = _ensure_tensor(a), _ensure_tensor(b)

    def vjp(g):
        return _unbroadcast(mul(g, b), a.shape), _unbroadcast(mul(g, a), b.shape)

    return _make(a.data * b.data, (a, b), vjp)


def div(a, b):
    a, b = _ensure_tensor(a), _ensure_tensor(b)

    def vjp(g):
        ga = div(g, b)
        gb = neg(div(mul(g, a), mul(b, b)))
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _make(a.data / b.data, (a, b), vjp)


def pow_const(a, exponent):
    a = _ensure_tensor(a)
    c = float(exponent)

    def vjp(g):
        return (mul(g, mul(Tensor(c), pow_const(a, c - 1.0))),)

    return _make(a.data**c, (a,), vjp)


def exp(a):
    a = _ensure_tensor(a)
    out_data = np.exp(a.data)

    def vjp(g):
        return (mul(g, exp(a)),)

    return _make(out_data, (a,), vjp)


def log(a):
    a = _ensure_tensor(a)

    def vjp(g):
        return (div(g, a),)

    return _make(np.log(a.data), (a,), vjp)


def sqrt(a):
    a = _ensure_tensor(a)

    def vjp(g):
        return (div(mul(Tensor(0.5), g), sqrt(a)),)

    return _make(np.sqrt(a.data), (a,), vjp)


def matmul(a, b):
    a, b = _ensure_tensor(a), _ensure_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError(
            f"matmul needs 2-d or batched operands, got {a.shape} and {b.shape}"
        )
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(
            f"matmul inner dimensions disagree: {a.shape} vs {b.shape}"
        )

    def vjp(g):
        ga = _unbroadcast(matmul(g, swapaxes(b, -1, -2)), a.shape)
        gb = _unbroadcast(matmul(swapaxes(a, -1, -2), g), b.shape)
        return ga, gb

    return _make(np.matmul(a.data, b.data), (a, b), vjp)


def sum_(a, axis=None, keepdims=False):
    a = _ensure_tensor(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is None:
            kd_shape = (1,) * a.ndim
        else:
            axes = (axis,) if isinstance(axis, int) else tuple(axis)
            axes = tuple(ax % a.ndim for ax in axes)
            kd_shape = tuple(
                1 if i in axes else s for i, s in enumerate(a.shape)
            )
        return (broadcast_to(reshape(g, kd_shape), a.shape),)

    return _make(data, (a,), vjp)


def mean(a, axis=None, keepdims=False):
    a = _ensure_tensor(a)
    if axis is None:
        count = a.size
    else:
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        count = 1
        for ax in axes:
            count *= a.shape[ax % a.ndim]
    return div(sum_(a, axis=axis, keepdims=keepdims), Tensor(float(count)))


def broadcast_to(a, shape):
    a = _ensure_tensor(a)
    shape = tuple(shape)

    def vjp(g):
        return (_unbroadcast(g, a.shape),)

    return _make(np.broadcast_to(a.data, shape).copy(), (a,), vjp)


def reshape(a, shape):
    a = _ensure_tensor(a)
    old_shape = a.shape

    def vjp(g):
        return (reshape(g, old_shape),)

    return _make(a.data.reshape(shape), (a,), vjp)


def swapaxes(a, axis1, axis2):
    a = _ensure_tensor(a)

    def vjp(g):
        return (swapaxes(g, axis1, axis2),)

    return _make(np.swapaxes(a.data, axis1, axis2), (a,), vjp)


def concat(tensors, axis=0):
    tensors = [_ensure_tensor(t) for t in tensors]
    ax = axis % tensors[0].ndim
    sizes = [t.shape[ax] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        pieces = []
        for i, t in enumerate(tensors):
            key = tuple(
                slice(offsets[i], offsets[i + 1]) if d == ax else slice(None)
                for d in range(t.ndim)
            )
            pieces.append(getitem(g, key))
        return tuple(pieces)

    return _make(
        np.concatenate([t.data for t in tensors], axis=ax), tuple(tensors), vjp
    )


def stack(tensors, axis=0):
    expanded = [
        reshape(t, t.shape[:axis] + (1,) + t.shape[axis:]) for t in tensors
    ]
    return concat(expanded, axis=axis)


def getitem(a, key):
    """Indexing with constant keys (slices, ints, integer arrays)."""
    a = _ensure_tensor(a)

    def vjp(g):
        return (scatter_to(g, key, a.shape),)

    return _make(a.data[key], (a,), vjp)


def scatter_to(g, key, shape):
    """Zeros of ``shape`` with ``g`` accumulated at ``key``; adjoint of getitem."""
    g = _ensure_tensor(g)

    def vjp(gg):
        return (getitem(gg, key),)

    out = np.zeros(shape, dtype=np.float64)
    if (
        isinstance(key, np.ndarray)
        and key.ndim == 1
        and np.issubdtype(key.dtype, np.integer)
        and g.ndim == 2
        and out.ndim == 2
    ):
        kernels.scatter_add_rows(out, key.astype(np.intp), np.ascontiguousarray(g.data))
    else:
        np.add.at(out, key, g.data)
    return _make(out, (g,), vjp)


def gather_rows(table, ids):
    """Row lookup by an integer id array; adjoint accumulates repeats."""
    ids = np.asarray(ids)
    if ids.min(initial=0) < 0 or (ids.size and ids.max() >= table.shape[0]):
        raise IndexError(
            f"id out of range for table with {table.shape[0]} rows"
        )
    flat = ids.reshape(-1).astype(np.intp)
    out = getitem(table, flat)
    return reshape(out, tuple(ids.shape) + (table.shape[1],))


def leaky_relu(x, slope=0.2):
    """Elementwise max(x, slope*x); slope must lie in (0, 1)."""
    if not 0.0 < slope < 1.0:
        raise ValueError(f"leaky_relu slope must be in (0, 1), got {slope}")
    x = _ensure_tensor(x)
    out_data, mask = kernels.leaky_relu(np.ascontiguousarray(x.data), float(slope))
    mask_t = Tensor(mask)

    def vjp(g):
        # second derivative vanishes: the mask is piecewise constant
        return (mul(g, mask_t),)

    return _make(out_data, (x,), vjp)


def relu(x):
    x = _ensure_tensor(x)
    mask_t = Tensor((x.data > 0.0).astype(np.float64))

    def vjp(g):
        return (mul(g, mask_t),)

    return _make(x.data * mask_t.data, (x,), vjp)


# ---------------------------------------------------------------------------
# backward machinery


def _topo_order(root):
    """Ancestors of ``root`` ordered so every node's operands precede it."""
    order, state = [], {}
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            state[id(node)] = 2
            order.append(node)
            continue
        if state.get(id(node)):
            continue
        state[id(node)] = 1
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and not state.get(id(parent)):
                stack.append((parent, False))
    return order


def _accumulate(root, seed, order=None):
    """Run one reverse sweep; returns {id(tensor): grad Tensor}."""
    if order is None:
        order = _topo_order(root)
    gmap = {id(root): seed}
    for node in reversed(order):
        g = gmap.get(id(node))
        if g is None or node._vjp is None:
            continue
        partials = node._vjp(g)
        for parent, pg in zip(node._parents, partials):
            if pg is None or not parent.requires_grad:
                continue
            pid = id(parent)
            if pid in gmap:
                gmap[pid] = add(gmap[pid], pg)
            else:
                gmap[pid] = pg
    return gmap


def grad(output, inputs, grad_output=None, allow_unused=False):
    """Gradients of ``output`` w.r.t. ``inputs``, attached to the graph.

    The returned tensors are built from recorded operations, so they can
    be used in further losses and differentiated again.
    """
    if not output.requires_grad:
        if allow_unused:
            return [Tensor(np.zeros_like(t.data)) for t in inputs]
        raise CapabilityError("output does not depend on any tracked tensor")
    if grad_output is None:
        grad_output = Tensor(np.ones_like(output.data))
    gmap = _accumulate(output, grad_output)
    results = []
    for t in inputs:
        g = gmap.get(id(t))
        if g is None:
            if not allow_unused:
                raise CapabilityError(
                    "an input is not reachable from the output on the recorded graph"
                )
            g = Tensor(np.zeros_like(t.data))
        results.append(g)
    return results


def backward(loss):
    """Accumulate numpy gradients into ``.grad`` of all reachable leaves.

    Recording is off during the sweep, so this builds no new graph.
    """
    if not loss.requires_grad:
        return
    with no_grad():
        order = _topo_order(loss)
        gmap = _accumulate(loss, Tensor(np.ones_like(loss.data)), order=order)
        for node in order:
            if node._vjp is None and node.requires_grad:
                g = gmap.get(id(node))
                if g is None:
                    continue
                if node.grad is None:
                    node.grad = np.zeros_like(node.data)
                node.grad += g.data


def input_gradient(net, x):
    """Gradient of ``sum(net(x))`` w.r.t. ``x``, still attached to the graph.

    ``net`` must be built from recorded operations; the result can enter
    further losses whose parameter gradients then include this path.
    """
    leaf = x if x.requires_grad else Tensor(x.data, requires_grad=True)
    out = net(leaf)
    if not isinstance(out, Tensor):
        raise CapabilityError("net must return a Tensor built from recorded ops")
    return grad(sum_(out), [leaf])[0]


# ---------------------------------------------------------------------------
# losses


def log_softmax(logits):
    shift = Tensor(logits.data.max(axis=1, keepdims=True))
    z = sub(logits, shift)
    lse = log(sum_(exp(z), axis=1, keepdims=True))
    return sub(z, lse)


def softmax(logits):
    if isinstance(logits, Tensor) and not logits.requires_grad:
        return Tensor(kernels.softmax_rows(np.ascontiguousarray(logits.data)))
    return exp(log_softmax(logits))


def softmax_cross_entropy(logits, labels):
    """Mean negative log-likelihood of integer ``labels`` under ``logits``."""
    labels = np.asarray(labels, dtype=np.intp)
    b, c = logits.shape
    if labels.shape != (b,):
        raise DimensionError(
            f"labels shape {labels.shape} does not match batch {b}"
        )
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise IndexError(f"label out of range [0, {c})")
    picked = getitem(log_softmax(logits), (np.arange(b), labels))
    return neg(mean(picked))


def kl_divergence(teacher_probs, student_logits):
    """Mean KL(teacher || softmax(student)) over the batch.

    Teacher rows are fixed reference distributions; no gradient flows to
    them. Zero teacher entries contribute exactly zero.
    """
    t = _ensure_tensor(teacher_probs).data
    if t.shape != student_logits.shape:
        raise DimensionError(
            f"teacher shape {t.shape} does not match student {student_logits.shape}"
        )
    row_sums = t.sum(axis=1)
    if np.any(t < 0.0) or np.any(np.abs(row_sums - 1.0) > 1e-6):
        raise DistributionError(
            "teacher rows must be nonnegative and sum to 1 within 1e-6"
        )
    entropy = np.where(t > 0.0, t * np.log(np.maximum(t, 1e-300)), 0.0)
    entropy_mean = float(entropy.sum(axis=1).mean())
    cross = neg(mean(sum_(mul(Tensor(t), log_softmax(student_logits)), axis=1)))
    return add(cross, Tensor(entropy_mean))


def one_hot(labels, num_classes):
    labels = np.asarray(labels, dtype=np.intp)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise IndexError(f"label out of range [0, {num_classes})")
    out = np.zeros((labels.size, num_classes), dtype=np.float64)
    out[np.arange(labels.size), labels] = 1.0
    return out
