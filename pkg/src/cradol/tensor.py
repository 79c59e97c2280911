"""Reverse-mode automatic differentiation over dense float64 numpy arrays.

Define-by-run: each op returns a Tensor holding its value plus a closure
that routes incoming gradients to the op's inputs. Calling backward() on a
scalar loss walks the recorded graph once in reverse topological order and
frees it. Everything is float64; networks in this package are small enough
that precision is cheap and finite-difference checks can be tight.
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    """Raised when op inputs have incompatible shapes."""


_GRAD_ENABLED = True


class no_grad:
    """Context manager that disables graph recording (forward values only)."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def item(self):
        return float(self.data)

    def detach(self):
        out = Tensor(self.data)
        return out

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        tag = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.data.shape}{tag}, rg={self.requires_grad})"

    # operator sugar used throughout the network code
    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __sub__(self, other):
        return add(self, neg(_lift(other)))

    def __rsub__(self, other):
        return add(_lift(other), neg(self))

    def __matmul__(self, other):
        return matmul(self, _lift(other))


def _lift(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(data, name=None):
    """A leaf tensor that collects gradients."""
    return Tensor(data, requires_grad=True, name=name)


def constant(data):
    return Tensor(data)


def _make(data, parents, backward_fn):
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward_fn
    return out


def _accum(t, g):
    if not t.requires_grad:
        return
    if t.grad is None:
        # copy: g may be shared with (or be) another node's grad buffer
        t.grad = np.array(g)
    else:
        t.grad += g


def _unbroadcast(g, shape):
    """Sum g down to `shape` (inverse of numpy broadcasting)."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# elementwise and linear-algebra ops


def add(a, b):
    a, b = _lift(a), _lift(b)
    try:
        data = a.data + b.data
    except ValueError as e:
        raise ShapeError(f"add: cannot broadcast {a.shape} with {b.shape}") from e

    def bw(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(g, b.data.shape))

    return _make(data, (a, b), bw)


def mul(a, b):
    a, b = _lift(a), _lift(b)
    try:
        data = a.data * b.data
    except ValueError as e:
        raise ShapeError(f"mul: cannot broadcast {a.shape} with {b.shape}") from e

    def bw(g):
        _accum(a, _unbroadcast(g * b.data, a.data.shape))
        _accum(b, _unbroadcast(g * a.data, b.data.shape))

    return _make(data, (a, b), bw)


def neg(a):
    def bw(g):
        _accum(a, -g)

    return _make(-a.data, (a,), bw)


def matmul(a, b):
    a, b = _lift(a), _lift(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul: needs ndim >= 2, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: inner dims differ, {a.shape} @ {b.shape}")
    data = np.matmul(a.data, b.data)

    def bw(g):
        _accum(a, _unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.data.shape))
        _accum(b, _unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.data.shape))

    return _make(data, (a, b), bw)


def sigmoid(a):
    x = a.data
    s = np.empty_like(x)
    pos = x >= 0
    s[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    s[~pos] = ex / (1.0 + ex)

    def bw(g):
        _accum(a, g * s * (1.0 - s))

    return _make(s, (a,), bw)


def tanh(a):
    t = np.tanh(a.data)

    def bw(g):
        _accum(a, g * (1.0 - t * t))

    return _make(t, (a,), bw)


def relu(a):
    data = np.maximum(a.data, 0.0)

    def bw(g):
        _accum(a, g * (a.data > 0.0))

    return _make(data, (a,), bw)


def exp(a):
    e = np.exp(a.data)

    def bw(g):
        _accum(a, g * e)

    return _make(e, (a,), bw)


def log(a):
    def bw(g):
        _accum(a, g / a.data)

    return _make(np.log(a.data), (a,), bw)


def softmax_rows(a):
    """Softmax along the last axis."""
    z = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=-1, keepdims=True)

    def bw(g):
        _accum(a, s * (g - (g * s).sum(axis=-1, keepdims=True)))

    return _make(s, (a,), bw)


def log_softmax_rows(a):
    z = a.data - a.data.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=-1, keepdims=True))
    out = z - lse

    def bw(g):
        _accum(a, g - np.exp(out) * g.sum(axis=-1, keepdims=True))

    return _make(out, (a,), bw)


# ---------------------------------------------------------------------------
# indexing, shaping, reductions


def row_select(a, idx):
    """Gather rows of `a` along axis 0 by integer index array."""
    idx = np.asarray(idx, dtype=np.intp)
    if idx.ndim > 1:
        raise ShapeError(f"row_select: index must be 0-d or 1-d, got {idx.shape}")
    data = a.data[idx]

    def bw(g):
        if a.requires_grad:
            buf = np.zeros_like(a.data)
            np.add.at(buf, idx, g)
            _accum(a, buf)

    return _make(data, (a,), bw)


def concat(tensors, axis=-1):
    tensors = [_lift(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum(sizes)[:-1]

    def bw(g):
        for t, piece in zip(tensors, np.split(g, offsets, axis=axis)):
            _accum(t, piece)

    return _make(data, tuple(tensors), bw)


def narrow(a, axis, start, length):
    """Contiguous slice [start, start+length) along `axis`."""
    if start < 0 or start + length > a.data.shape[axis]:
        raise ShapeError(
            f"narrow: [{start}, {start + length}) out of bounds for axis {axis} of {a.shape}"
        )
    sl = [slice(None)] * a.data.ndim
    sl[axis] = slice(start, start + length)
    sl = tuple(sl)
    data = a.data[sl].copy()

    def bw(g):
        if a.requires_grad:
            buf = np.zeros_like(a.data)
            buf[sl] = g
            _accum(a, buf)

    return _make(data, (a,), bw)


def reshape(a, shape):
    old = a.data.shape
    data = a.data.reshape(shape)

    def bw(g):
        _accum(a, g.reshape(old))

    return _make(data, (a,), bw)


def transpose_last2(a):
    data = np.swapaxes(a.data, -1, -2)

    def bw(g):
        _accum(a, np.swapaxes(g, -1, -2))

    return _make(data, (a,), bw)


def swap01(a):
    data = np.swapaxes(a.data, 0, 1)

    def bw(g):
        _accum(a, np.swapaxes(g, 0, 1))

    return _make(data, (a,), bw)


def where_mask(mask, a, b):
    """mask ? a : b elementwise, with a constant 0/1 mask.

    Unselected entries pass b through bit-exactly (no arithmetic applied).
    """
    mask = np.asarray(mask, dtype=bool)
    data = np.where(mask, a.data, b.data)

    def bw(g):
        _accum(a, _unbroadcast(np.where(mask, g, 0.0), a.data.shape))
        _accum(b, _unbroadcast(np.where(mask, 0.0, g), b.data.shape))

    return _make(data, (a, b), bw)


def sum_(a, axis=None, keepdims=False):
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def bw(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        _accum(a, np.broadcast_to(g, a.data.shape))

    return _make(data, (a,), bw)


def mean_(a, axis=None, keepdims=False):
    data = a.data.mean(axis=axis, keepdims=keepdims)
    n = a.data.size if axis is None else a.data.shape[axis]

    def bw(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        _accum(a, np.broadcast_to(g, a.data.shape) / n)

    return _make(data, (a,), bw)


# ---------------------------------------------------------------------------
# backward pass


def backward(loss):
    """Accumulate d(loss)/d(leaf) into .grad of every reachable leaf.

    The graph is consumed: op records are dropped once visited.
    """
    if loss.data.size != 1:
        raise ShapeError(f"backward: loss must be scalar, got shape {loss.shape}")

    topo = []
    visited = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited and p._backward is not None:
                stack.append((p, False))

    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._backward is not None:
            node._backward(node.grad)
            node._backward = None
            node._parents = ()
            node.grad = None
    loss.grad = None


# ---------------------------------------------------------------------------
# generic dispatcher (name -> op), the uniform entry point for single ops

OPS = {
    "matmul": matmul,
    "add": add,
    "mul": mul,
    "softmax_rows": softmax_rows,
    "sigmoid": sigmoid,
    "tanh": tanh,
    "relu": relu,
    "row_select": row_select,
    "concat": concat,
    "sum": sum_,
    "mean": mean_,
    "log": log,
    "exp": exp,
}


def forward_op(kind, *inputs, **kwargs):
    if kind not in OPS:
        raise KeyError(f"unknown op kind {kind!r}; known: {sorted(OPS)}")
    return OPS[kind](*inputs, **kwargs)
