"""Reverse-mode automatic differentiation over dense float64 arrays.

Define-by-run: every operation allocates a fresh node that remembers its
inputs and how to push the upstream gradient back to them, so a graph
exists only for the lifetime of the values it produced. Everything is
float64; at desk scale numeric headroom is worth far more than speed and
it keeps finite-difference checks tight.

Broadcasting is deliberately restricted: operands must either match in
shape exactly or one of them must be a single-element tensor. Anything
fancier raises ShapeError.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np

_creation_counter = itertools.count()

# log(float64 max); exp above this overflows to inf
_EXP_MAX = 709.0


class ShapeError(ValueError):
    """Operand shapes violate an operation's contract."""


class DomainError(ValueError):
    """Numeric input outside an operation's domain (log of <= 0, exp overflow)."""


class Tensor:
    """A float64 array node in the differentiation graph.

    Leaf tensors are created directly; op results are created by the
    functions in this module. ``grad`` stays None until ``backward``
    reaches the tensor, and repeated backward calls accumulate.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_grad_fn", "_order")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._grad_fn = None
        self._order = next(_creation_counter)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() requires a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def backward(self) -> None:
        """Accumulate gradients of this scalar into every reachable tensor.

        Visits nodes in descending creation order, which is a valid
        reverse-topological order because parents always exist before
        their consumers. Grad contributions from multiple consumers sum.
        """
        if self.data.size != 1:
            raise ValueError(f"backward requires a scalar loss, got shape {self.shape}")
        nodes: dict[int, Tensor] = {}
        stack: list[Tensor] = [self]
        while stack:
            t = stack.pop()
            if id(t) in nodes or not t.requires_grad:
                continue
            nodes[id(t)] = t
            stack.extend(t._parents)
        if not self.requires_grad:
            return
        flow: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for t in sorted(nodes.values(), key=lambda n: n._order, reverse=True):
            g = flow.pop(id(t), None)
            if g is None:
                continue
            t.grad = g.copy() if t.grad is None else t.grad + g
            if t._grad_fn is None:
                continue
            for parent, pg in zip(t._parents, t._grad_fn(g)):
                if pg is None or not parent.requires_grad:
                    continue
                acc = flow.get(id(parent))
                flow[id(parent)] = pg if acc is None else acc + pg

    # ---- operator sugar -------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def sum(self, axis: int | None = None) -> "Tensor":
        return reduce_sum(self, axis)

    def mean(self, axis: int | None = None) -> "Tensor":
        return reduce_mean(self, axis)

    def reshape(self, shape) -> "Tensor":
        return reshape(self, shape)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"


def as_tensor(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(x)


def _result(data: np.ndarray, parents: Sequence[Tensor], grad_fn) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = data
    out.requires_grad = any(p.requires_grad for p in parents)
    out.grad = None
    out._parents = tuple(parents)
    out._grad_fn = grad_fn if out.requires_grad else None
    out._order = next(_creation_counter)
    return out


def _check_binary(a: Tensor, b: Tensor, op: str) -> None:
    if a.data.shape == b.data.shape:
        return
    if a.data.size == 1 or b.data.size == 1:
        return
    raise ShapeError(
        f"{op}: shapes {a.data.shape} and {b.data.shape} are neither equal "
        "nor scalar-broadcastable"
    )


def _shrink(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Collapse a broadcast gradient back to a scalar operand's shape."""
    if g.shape == shape:
        return g
    return np.array(np.sum(g)).reshape(shape)


# ---- elementwise arithmetic ---------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_binary(a, b, "add")
    data = a.data + b.data

    def grad_fn(g):
        return _shrink(g, a.data.shape), _shrink(g, b.data.shape)

    return _result(data, (a, b), grad_fn)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_binary(a, b, "sub")
    data = a.data - b.data

    def grad_fn(g):
        return _shrink(g, a.data.shape), _shrink(-g, b.data.shape)

    return _result(data, (a, b), grad_fn)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_binary(a, b, "mul")
    data = a.data * b.data

    def grad_fn(g):
        return _shrink(g * b.data, a.data.shape), _shrink(g * a.data, b.data.shape)

    return _result(data, (a, b), grad_fn)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_binary(a, b, "div")
    if np.any(b.data == 0.0):
        raise DomainError("div: divisor contains zero")
    data = a.data / b.data

    def grad_fn(g):
        ga = _shrink(g / b.data, a.data.shape)
        gb = _shrink(-g * a.data / (b.data * b.data), b.data.shape)
        return ga, gb

    return _result(data, (a, b), grad_fn)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.data.shape} and {b.data.shape}")
    data = a.data @ b.data

    def grad_fn(g):
        return g @ b.data.T, a.data.T @ g

    return _result(data, (a, b), grad_fn)


# ---- elementwise nonlinearities ------------------------------------------


def relu(x) -> Tensor:
    x = as_tensor(x)
    data = np.maximum(x.data, 0.0)

    def grad_fn(g):
        return (g * (x.data > 0.0),)

    return _result(data, (x,), grad_fn)


def _sigmoid_arr(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    data = _sigmoid_arr(x.data)

    def grad_fn(g):
        return (g * data * (1.0 - data),)

    return _result(data, (x,), grad_fn)


def softplus(x) -> Tensor:
    """log(1 + exp(x)) in its overflow-free form; gradient is sigmoid(x)."""
    x = as_tensor(x)
    data = np.maximum(x.data, 0.0) + np.log1p(np.exp(-np.abs(x.data)))

    def grad_fn(g):
        return (g * _sigmoid_arr(x.data),)

    return _result(data, (x,), grad_fn)


def log(x) -> Tensor:
    x = as_tensor(x)
    lo = np.min(x.data) if x.data.size else 1.0
    if lo <= 0.0:
        raise DomainError(f"log: input must be strictly positive, min value is {lo}")
    data = np.log(x.data)

    def grad_fn(g):
        return (g / x.data,)

    return _result(data, (x,), grad_fn)


def exp(x) -> Tensor:
    x = as_tensor(x)
    hi = np.max(x.data) if x.data.size else 0.0
    if hi > _EXP_MAX:
        raise DomainError(f"exp: input {hi} would overflow float64")
    data = np.exp(x.data)

    def grad_fn(g):
        return (g * data,)

    return _result(data, (x,), grad_fn)


# ---- softmax, reductions, shape ops ---------------------------------------


def _check_axis(x: Tensor, axis: int, op: str) -> int:
    if not -x.data.ndim <= axis < x.data.ndim:
        raise ShapeError(f"{op}: axis {axis} out of bounds for shape {x.data.shape}")
    return axis % x.data.ndim


def softmax(x, axis: int = -1) -> Tensor:
    """Max-shifted softmax along ``axis``; outputs sum to 1 along it."""
    x = as_tensor(x)
    axis = _check_axis(x, axis, "softmax")
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    e = np.exp(shifted)
    data = e / np.sum(e, axis=axis, keepdims=True)

    def grad_fn(g):
        dot = np.sum(g * data, axis=axis, keepdims=True)
        return (data * (g - dot),)

    return _result(data, (x,), grad_fn)


def reduce_sum(x, axis: int | None = None) -> Tensor:
    x = as_tensor(x)
    if axis is None:
        data = np.array(np.sum(x.data))

        def grad_fn(g):
            return (np.full(x.data.shape, float(g)),)

    else:
        axis = _check_axis(x, axis, "sum")
        data = np.sum(x.data, axis=axis)

        def grad_fn(g):
            return (np.broadcast_to(np.expand_dims(g, axis), x.data.shape).copy(),)

    return _result(data, (x,), grad_fn)


def reduce_mean(x, axis: int | None = None) -> Tensor:
    x = as_tensor(x)
    if axis is None:
        n = x.data.size
        data = np.array(np.mean(x.data))

        def grad_fn(g):
            return (np.full(x.data.shape, float(g) / n),)

    else:
        axis = _check_axis(x, axis, "mean")
        n = x.data.shape[axis]
        data = np.mean(x.data, axis=axis)

        def grad_fn(g):
            return (np.broadcast_to(np.expand_dims(g, axis), x.data.shape).copy() / n,)

    return _result(data, (x,), grad_fn)


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    shape = tuple(int(s) for s in (shape if isinstance(shape, Iterable) else (shape,)))
    if int(np.prod(shape, dtype=np.int64)) != x.data.size:
        raise ShapeError(f"reshape: cannot view {x.data.shape} as {shape}")
    data = x.data.reshape(shape)

    def grad_fn(g):
        return (g.reshape(x.data.shape),)

    return _result(data, (x,), grad_fn)


def concat(tensors: Sequence, axis: int = 0) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    if not ts:
        raise ShapeError("concat: need at least one tensor")
    axis = _check_axis(ts[0], axis, "concat")
    ndim = ts[0].data.ndim
    for t in ts[1:]:
        if t.data.ndim != ndim:
            raise ShapeError(f"concat: rank mismatch {ts[0].data.shape} vs {t.data.shape}")
        for d in range(ndim):
            if d != axis and t.data.shape[d] != ts[0].data.shape[d]:
                raise ShapeError(
                    f"concat: non-axis dims differ, {ts[0].data.shape} vs {t.data.shape}"
                )
    data = np.concatenate([t.data for t in ts], axis=axis)
    offsets = np.cumsum([t.data.shape[axis] for t in ts])[:-1]

    def grad_fn(g):
        return tuple(np.split(g, offsets, axis=axis))

    return _result(data, ts, grad_fn)
