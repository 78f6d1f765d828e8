"""Reverse-mode automatic differentiation over float64 numpy arrays.

A Tensor records the ops that produced it; backward() walks the graph in
reverse topological order and accumulates gradients into every node that
requires them.  Recorded tensors are treated as immutable: ops always
allocate fresh output arrays.  The convolution gather/scatter runs through
the kernels backend (compiled extension when available, numpy otherwise).
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from . import kernels

_grad_enabled = True


@contextmanager
def no_grad():
    """Disable graph recording inside the block (e.g. target-network passes)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def backward(self) -> None:
        if self.data.size != 1:
            raise ValueError(f"backward() requires a scalar loss, got shape {self.shape}")
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in visited:
                    stack.append((p, False))
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad = self.grad + np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, neg(_wrap(other)))

    def __rsub__(self, other):
        return add(_wrap(other), neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 else shape[0])

    def transpose(self, axes):
        return transpose(self, axes)

    def sum(self, axis=None):
        return sum_(self, axis)

    def mean(self, axis=None):
        return mean(self, axis)


class Parameter(Tensor):
    __slots__ = ("name",)

    def __init__(self, data, name: str = ""):
        super().__init__(data, requires_grad=True)
        self.name = name


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _recording(*inputs: Tensor) -> bool:
    return _grad_enabled and any(t.requires_grad for t in inputs)


def _make(data: np.ndarray, parents: tuple[Tensor, ...], backward) -> Tensor:
    out = Tensor(data)
    if _recording(*parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    return out


def _accum(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, s in enumerate(shape):
        if s == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    data = a.data + b.data

    def backward(g):
        if a.requires_grad:
            _accum(a, _unbroadcast(g, a.data.shape))
        if b.requires_grad:
            _accum(b, _unbroadcast(g, b.data.shape))

    return _make(data, (a, b), backward)


def neg(a) -> Tensor:
    a = _wrap(a)

    def backward(g):
        if a.requires_grad:
            _accum(a, -g)

    return _make(-a.data, (a,), backward)


def mul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    data = a.data * b.data

    def backward(g):
        if a.requires_grad:
            _accum(a, _unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            _accum(b, _unbroadcast(g * a.data, b.data.shape))

    return _make(data, (a, b), backward)


def matmul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ValueError(f"matmul requires ndim >= 2 operands, got {a.shape} @ {b.shape}")
    data = a.data @ b.data

    def backward(g):
        if a.requires_grad:
            ga = g @ np.swapaxes(b.data, -1, -2)
            _accum(a, _unbroadcast(ga, a.data.shape))
        if b.requires_grad:
            gb = np.swapaxes(a.data, -1, -2) @ g
            _accum(b, _unbroadcast(gb, b.data.shape))

    return _make(data, (a, b), backward)


def relu(a) -> Tensor:
    a = _wrap(a)
    data = np.maximum(a.data, 0.0)

    def backward(g):
        if a.requires_grad:
            _accum(a, g * (a.data > 0.0))

    return _make(data, (a,), backward)


def tanh(a) -> Tensor:
    a = _wrap(a)
    data = np.tanh(a.data)

    def backward(g):
        if a.requires_grad:
            _accum(a, g * (1.0 - data * data))

    return _make(data, (a,), backward)


def exp(a) -> Tensor:
    a = _wrap(a)
    data = np.exp(a.data)

    def backward(g):
        if a.requires_grad:
            _accum(a, g * data)

    return _make(data, (a,), backward)


def log(a) -> Tensor:
    a = _wrap(a)
    data = np.log(a.data)

    def backward(g):
        if a.requires_grad:
            _accum(a, g / a.data)

    return _make(data, (a,), backward)


def tanh_clip(a, clip_val: float) -> Tensor:
    """Soft clamp clip_val * tanh(x / clip_val); near-identity for |x| << clip_val."""
    if clip_val <= 0:
        raise ValueError(f"clip_val must be positive, got {clip_val}")
    return mul(tanh(mul(a, 1.0 / clip_val)), clip_val)


def _check_axis(axis: int, ndim: int) -> int:
    if not -ndim <= axis < ndim:
        raise ValueError(f"axis {axis} out of range for ndim {ndim}")
    return axis % ndim


def log_softmax(a, axis: int) -> Tensor:
    a = _wrap(a)
    axis = _check_axis(axis, a.ndim)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    data = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def backward(g):
        if a.requires_grad:
            _accum(a, g - np.exp(data) * g.sum(axis=axis, keepdims=True))

    return _make(data, (a,), backward)


def softmax(a, axis: int) -> Tensor:
    a = _wrap(a)
    axis = _check_axis(axis, a.ndim)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    data = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        if a.requires_grad:
            _accum(a, data * (g - (g * data).sum(axis=axis, keepdims=True)))

    return _make(data, (a,), backward)


def sum_(a, axis=None) -> Tensor:
    a = _wrap(a)
    if axis is not None:
        axis = _check_axis(axis, a.ndim)
    data = a.data.sum(axis=axis)

    def backward(g):
        if a.requires_grad:
            if axis is None:
                _accum(a, np.broadcast_to(g, a.data.shape).copy())
            else:
                _accum(a, np.broadcast_to(np.expand_dims(g, axis), a.data.shape).copy())

    return _make(data, (a,), backward)


def mean(a, axis=None) -> Tensor:
    a = _wrap(a)
    if axis is None:
        n = a.data.size
    else:
        axis = _check_axis(axis, a.ndim)
        n = a.data.shape[axis]
    return mul(sum_(a, axis), 1.0 / n)


def reshape(a, shape) -> Tensor:
    a = _wrap(a)
    data = a.data.reshape(shape)

    def backward(g):
        if a.requires_grad:
            _accum(a, g.reshape(a.data.shape))

    return _make(data, (a,), backward)


def transpose(a, axes) -> Tensor:
    a = _wrap(a)
    data = np.transpose(a.data, axes)
    inverse = np.argsort(axes)

    def backward(g):
        if a.requires_grad:
            _accum(a, np.transpose(g, inverse))

    return _make(data, (a,), backward)


def concat(tensors, axis: int) -> Tensor:
    tensors = [_wrap(t) for t in tensors]
    axis = _check_axis(axis, tensors[0].ndim)
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(lo, hi)
                _accum(t, g[tuple(sl)])

    return _make(data, tuple(tensors), backward)


def repeat_axis(a, n: int, axis: int) -> Tensor:
    """np.repeat semantics: each slice along axis appears n times consecutively."""
    a = _wrap(a)
    axis = _check_axis(axis, a.ndim)
    data = np.repeat(a.data, n, axis=axis)

    def backward(g):
        if a.requires_grad:
            shape = list(a.data.shape)
            shape[axis : axis + 1] = [shape[axis], n]
            _accum(a, g.reshape(shape).sum(axis=axis + 1))

    return _make(data, (a,), backward)


def tile_axis0(a, n: int) -> Tensor:
    """Stack n copies of the whole array along a new leading repetition of axis 0."""
    a = _wrap(a)
    data = np.tile(a.data, (n,) + (1,) * (a.ndim - 1))

    def backward(g):
        if a.requires_grad:
            _accum(a, g.reshape((n,) + a.data.shape).sum(axis=0))

    return _make(data, (a,), backward)


def tile_last(a, n: int) -> Tensor:
    """Broadcast (..., d) -> (..., d, n); backward sums over the new axis."""
    a = _wrap(a)
    data = np.repeat(a.data[..., None], n, axis=-1)

    def backward(g):
        if a.requires_grad:
            _accum(a, g.sum(axis=-1))

    return _make(data, (a,), backward)


def tile_hw(a, h: int, w: int) -> Tensor:
    """Broadcast (b, c) -> (b, c, h, w) for tiling vectors over conv locations."""
    a = _wrap(a)
    if a.ndim != 2:
        raise ValueError(f"tile_hw expects a (batch, channels) tensor, got {a.shape}")
    data = np.broadcast_to(a.data[:, :, None, None], a.data.shape + (h, w)).copy()

    def backward(g):
        if a.requires_grad:
            _accum(a, g.sum(axis=(2, 3)))

    return _make(data, (a,), backward)


def take_rows(a, index: np.ndarray) -> Tensor:
    """Select a[i, index[i]] along axis 1: (b, n, ...) -> (b, ...)."""
    a = _wrap(a)
    index = np.asarray(index, dtype=np.intp)
    if index.shape != (a.data.shape[0],):
        raise ValueError(f"index shape {index.shape} must be ({a.data.shape[0]},)")
    rows = np.arange(a.data.shape[0])
    data = a.data[rows, index]

    def backward(g):
        if a.requires_grad:
            full = np.zeros_like(a.data)
            full[rows, index] = g
            _accum(a, full)

    return _make(data, (a,), backward)


def conv2d(x, w, stride) -> Tensor:
    """Valid cross-correlation of (b, ci, h, w) with (co, ci, kh, kw)."""
    x, w = _wrap(x), _wrap(w)
    if x.ndim != 4 or w.ndim != 4:
        raise ValueError(f"conv2d expects 4-D input and kernel, got {x.shape}, {w.shape}")
    if x.data.shape[1] != w.data.shape[1]:
        raise ValueError(f"channel mismatch: input {x.shape} vs kernel {w.shape}")
    sh, sw = (stride, stride) if isinstance(stride, int) else stride
    if sh < 1 or sw < 1:
        raise ValueError(f"stride must be >= 1, got {(sh, sw)}")
    b, ci, h, wd = x.data.shape
    co, _, kh, kw = w.data.shape
    if kh > h or kw > wd:
        raise ValueError(f"kernel {(kh, kw)} larger than input {(h, wd)}")
    cols, oh, ow = kernels.im2col(np.ascontiguousarray(x.data), kh, kw, sh, sw)
    wmat = w.data.reshape(co, ci * kh * kw)
    out = (cols @ wmat.T).reshape(b, oh, ow, co).transpose(0, 3, 1, 2)

    def backward(g):
        gmat = np.ascontiguousarray(g.transpose(0, 2, 3, 1)).reshape(b * oh * ow, co)
        if w.requires_grad:
            _accum(w, (gmat.T @ cols).reshape(w.data.shape))
        if x.requires_grad:
            gcols = np.ascontiguousarray(gmat @ wmat)
            _accum(x, kernels.col2im(gcols, b, ci, h, wd, kh, kw, sh, sw))

    return _make(np.ascontiguousarray(out), (x, w), backward)


def kl_categorical(p, log_q) -> Tensor:
    """KL(p || q) from a constant distribution p and log-probabilities log_q.

    Sums over all axes (batched inputs give the batch-summed KL); zero-mass
    atoms contribute nothing.
    """
    p = np.asarray(p, dtype=np.float64)
    log_q = _wrap(log_q)
    if p.shape != log_q.data.shape:
        raise ValueError(f"shape mismatch: p {p.shape} vs log_q {log_q.shape}")
    if np.any(p < -1e-12):
        raise ValueError("p must be a nonnegative distribution")
    plogp = float(np.sum(np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)))
    cross = sum_(mul(log_q, p))
    return add(neg(cross), plogp)
