"""Reverse-mode automatic differentiation over numpy arrays.

Every operation builds a node in an implicit tape (the DAG of ``Tensor``
objects); ``Tensor.backward()`` walks the tape in reverse topological order
and accumulates gradients into the leaves. Only the primitives needed by the
models in this repository are provided; anything else fails loudly at graph
construction time rather than silently producing wrong gradients.

All data is float64. Constants (numpy arrays, python scalars) may be mixed
into expressions and are wrapped as non-differentiable leaves.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NumericsError

_GRAD_ENABLED = True


@contextmanager
def no_grad():
    """Disable tape construction inside the block (pure numpy forward)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, name=None, _parents=(), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}{tag}, requires_grad={self.requires_grad})"

    # -- graph mechanics ---------------------------------------------------

    def backward(self):
        if self.data.size != 1:
            raise NumericsError("backward() requires a scalar loss")
        order = _toposort(self)
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)
        return self

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def _accumulate(self, g, own=False):
        # own=True hands over a freshly-built array, skipping the copy
        if self.grad is None:
            self.grad = g if own else np.array(g)
        else:
            self.grad += g

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __sub__(self, other):
        return add(self, -as_tensor(other))

    def __rsub__(self, other):
        return add(as_tensor(other), -self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return index(self, key)

    # method conveniences mirroring the module-level ops
    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 else shape[0])


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(data, name=None) -> Tensor:
    """A trainable leaf. Rejects non-finite initial values."""
    arr = np.asarray(data, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NumericsError(f"non-finite values in parameter {name!r}")
    return Tensor(arr.copy(), requires_grad=True, name=name)


def _toposort(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def _make(data, parents: Sequence[Tensor], backward: Callable | None) -> Tensor:
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, _parents=tuple(parents), _backward=backward)
    return Tensor(data)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to the original shape."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, s in enumerate(shape):
        if s == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


# -- primitives -------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data + b.data

    def backward(g):
        if a.requires_grad:
            ga = _unbroadcast(g, a.data.shape)
            a._accumulate(ga, own=ga is not g)
        if b.requires_grad:
            gb = _unbroadcast(g, b.data.shape)
            b._accumulate(gb, own=gb is not g)

    return _make(out_data, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data * b.data

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.data.shape), own=True)
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.data.shape), own=True)

    return _make(out_data, (a, b), backward)


def matmul(a, b) -> Tensor:
    """Matrix product. Supports 2-D operands and numpy-style stacked batches
    where leading dimensions broadcast (e.g. (B,n,k) @ (k,m))."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise NumericsError("matmul expects operands with ndim >= 2")
    out_data = np.matmul(a.data, b.data)

    def backward(g):
        if a.requires_grad:
            ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
            a._accumulate(_unbroadcast(ga, a.data.shape), own=True)
        if b.requires_grad:
            gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
            b._accumulate(_unbroadcast(gb, b.data.shape), own=True)

    return _make(out_data, (a, b), backward)


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    # overflow-free: sigma(x) = (1 + tanh(x/2)) / 2
    out_data = 0.5 * (1.0 + np.tanh(0.5 * x.data))

    def backward(g):
        if x.requires_grad:
            x._accumulate(g * out_data * (1.0 - out_data), own=True)

    return _make(out_data, (x,), backward)


def tanh(x) -> Tensor:
    x = as_tensor(x)
    out_data = np.tanh(x.data)

    def backward(g):
        if x.requires_grad:
            x._accumulate(g * (1.0 - out_data * out_data), own=True)

    return _make(out_data, (x,), backward)


def relu(x) -> Tensor:
    x = as_tensor(x)
    out_data = np.maximum(x.data, 0.0)

    def backward(g):
        if x.requires_grad:
            x._accumulate(g * (x.data > 0.0), own=True)

    return _make(out_data, (x,), backward)


def log(x) -> Tensor:
    x = as_tensor(x)
    out_data = np.log(x.data)

    def backward(g):
        if x.requires_grad:
            x._accumulate(g / x.data, own=True)

    return _make(out_data, (x,), backward)


def exp(x) -> Tensor:
    x = as_tensor(x)
    out_data = np.exp(x.data)

    def backward(g):
        if x.requires_grad:
            x._accumulate(g * out_data, own=True)

    return _make(out_data, (x,), backward)


def tsum(x, axis=None, keepdims=False) -> Tensor:
    x = as_tensor(x)
    out_data = x.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if not x.requires_grad:
            return
        if axis is None:
            x._accumulate(np.broadcast_to(g, x.data.shape).copy(), own=True)
        else:
            ge = g if keepdims else np.expand_dims(g, axis)
            x._accumulate(np.broadcast_to(ge, x.data.shape).copy(), own=True)

    return _make(out_data, (x,), backward)


def tmean(x, axis=None, keepdims=False) -> Tensor:
    x = as_tensor(x)
    n = x.data.size if axis is None else x.data.shape[axis]
    return mul(tsum(x, axis=axis, keepdims=keepdims), 1.0 / n)


def tmax(x, axis, keepdims=False) -> Tensor:
    """Max over one axis (max-pool). Ties route the gradient to the first
    maximal entry along the axis."""
    x = as_tensor(x)
    out_data = x.data.max(axis=axis, keepdims=keepdims)
    arg = np.expand_dims(x.data.argmax(axis=axis), axis)

    def backward(g):
        if not x.requires_grad:
            return
        gx = np.zeros_like(x.data)
        ge = g if keepdims else np.expand_dims(g, axis)
        np.put_along_axis(gx, arg, ge, axis)
        x._accumulate(gx, own=True)

    return _make(out_data, (x,), backward)


def softmax(x, axis=-1) -> Tensor:
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        if x.requires_grad:
            inner = (g * out_data).sum(axis=axis, keepdims=True)
            x._accumulate(out_data * (g - inner), own=True)

    return _make(out_data, (x,), backward)


def log_softmax(x, axis=-1) -> Tensor:
    x = as_tensor(x)
    m = x.data.max(axis=axis, keepdims=True)
    shifted = x.data - m
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out_data = shifted - lse

    def backward(g):
        if x.requires_grad:
            sm = np.exp(out_data)
            x._accumulate(g - sm * g.sum(axis=axis, keepdims=True), own=True)

    return _make(out_data, (x,), backward)


def concat(tensors: Iterable[Tensor], axis=0) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    out_data = np.concatenate([t.data for t in ts], axis=axis)
    sizes = [t.data.shape[axis] for t in ts]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(ts, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(lo, hi)
                t._accumulate(g[tuple(sl)])

    return _make(out_data, ts, backward)


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    out_data = x.data.reshape(shape)

    def backward(g):
        if x.requires_grad:
            x._accumulate(g.reshape(x.data.shape))

    return _make(out_data, (x,), backward)


def swapaxes(x, a, b) -> Tensor:
    x = as_tensor(x)
    out_data = np.swapaxes(x.data, a, b)

    def backward(g):
        if x.requires_grad:
            x._accumulate(np.swapaxes(g, a, b))

    return _make(out_data, (x,), backward)


def _is_basic_key(key) -> bool:
    parts = key if isinstance(key, tuple) else (key,)
    return all(isinstance(k, (int, np.integer, slice)) or k is None or k is Ellipsis
               for k in parts)


def index(x, key) -> Tensor:
    """Basic and integer-array indexing; the backward pass scatter-adds."""
    x = as_tensor(x)
    out_data = x.data[key]
    basic = _is_basic_key(key)

    def backward(g):
        if x.requires_grad:
            gx = np.zeros_like(x.data)
            if basic:
                gx[key] += g
            else:
                np.add.at(gx, key, g)
            x._accumulate(gx, own=True)

    return _make(out_data, (x,), backward)


def rows(x, idx) -> Tensor:
    """Embedding lookup: select rows of a 2-D table by an integer array.

    Output shape is idx.shape + (table_cols,); repeated indices accumulate
    gradient into the same row.
    """
    x = as_tensor(x)
    idx = np.asarray(idx, dtype=np.intp)
    if x.data.ndim != 2:
        raise NumericsError("rows() expects a 2-D table")
    out_data = x.data[idx]

    def backward(g):
        if x.requires_grad:
            gx = np.zeros_like(x.data)
            np.add.at(gx, idx.reshape(-1), g.reshape(-1, x.data.shape[1]))
            x._accumulate(gx, own=True)

    return _make(out_data, (x,), backward)


def take_along(x, idx, axis) -> Tensor:
    """Differentiable ``np.take_along_axis`` (e.g. gather gold-head scores)."""
    x = as_tensor(x)
    idx = np.asarray(idx, dtype=np.intp)
    out_data = np.take_along_axis(x.data, idx, axis=axis)

    def backward(g):
        if x.requires_grad:
            gx = np.zeros_like(x.data)
            grids = np.meshgrid(*[np.arange(s) for s in idx.shape], indexing="ij")
            full = list(grids)
            full[axis] = idx
            np.add.at(gx, tuple(full), g)
            x._accumulate(gx, own=True)

    return _make(out_data, (x,), backward)


def unfold(x, size, axis=1) -> Tensor:
    """Sliding windows of ``size`` along ``axis`` as a new trailing axis.

    (N, L, d) with axis=1 yields (N, L-size+1, size, d). Overlapping windows
    scatter-add their gradients back.
    """
    x = as_tensor(x)
    if size > x.data.shape[axis]:
        raise NumericsError(f"unfold size {size} exceeds axis length {x.data.shape[axis]}")
    view = np.lib.stride_tricks.sliding_window_view(x.data, size, axis=axis)
    # sliding_window_view puts the window axis last; move it after `axis`
    out_data = np.moveaxis(view, -1, axis + 1).copy()
    npos = x.data.shape[axis] - size + 1

    def backward(g):
        if not x.requires_grad:
            return
        gx = np.zeros_like(x.data)
        gxm = np.moveaxis(gx, axis, 0)
        g_moved = np.moveaxis(g, (axis, axis + 1), (0, 1))  # (npos, size, ...)
        for j in range(size):
            gxm[j : j + npos] += g_moved[:, j]
        x._accumulate(gx, own=True)

    return _make(out_data, (x,), backward)


def dropout(x, rate: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; identity when rate is 0."""
    if rate <= 0.0:
        return as_tensor(x)
    if rate >= 1.0:
        raise NumericsError("dropout rate must be < 1")
    x = as_tensor(x)
    mask = (rng.random(x.data.shape) >= rate) / (1.0 - rate)
    return mul(x, mask)


def stack_time(tensors: Sequence[Tensor]) -> Tensor:
    """Stack per-step (B, d) tensors into (B, T, d)."""
    return concat([reshape(t, (t.shape[0], 1, t.shape[1])) for t in tensors], axis=1)
