"""Dense float64 tensors with a reverse-mode gradient tape.

Only what the taggers and relation classifiers need is implemented. Elementwise
ops accept operands of equal shape or a scalar (size-1) operand; any other
broadcast must be requested explicitly with :meth:`Tensor.expand`.
"""

from __future__ import annotations

import zlib
from contextlib import contextmanager
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

import numpy as np

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence]

_GRAD_ENABLED = True


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible."""

    def __init__(self, op: str, *shapes: tuple):
        self.op = op
        self.shapes = shapes
        joined = " vs ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"{op}: incompatible shapes {joined}")


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable tape recording inside the block (inference)."""
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
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.array(data, dtype=np.float64) if not isinstance(data, np.ndarray) or data.dtype != np.float64 else data
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self._parents: tuple = ()
        self._backward: Optional[Callable[[np.ndarray], tuple]] = None
        self.name = name

    # -- basic properties -------------------------------------------------
    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        rg = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{rg})"

    def __len__(self) -> int:
        return len(self.data)

    # -- autodiff ---------------------------------------------------------
    def backward(self) -> None:
        """Back-propagate from this scalar through the recorded graph.

        Gradients are added into ``.grad`` of every leaf that requires them;
        intermediate nodes receive their gradient too, then the graph links
        are dropped so the tape cannot be replayed.
        """
        if self.data.size != 1:
            raise ShapeError("backward (loss must be scalar)", self.shape)
        order = _topological(self)
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            node.grad = g
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pg
                else:
                    grads[key] = pg
        for node in order:
            if node._backward is not None:
                node._parents = ()
                node._backward = None

    # -- operator sugar ---------------------------------------------------
    def __add__(self, other): return add(self, other)
    def __radd__(self, other): return add(other, self)
    def __sub__(self, other): return sub(self, other)
    def __rsub__(self, other): return sub(other, self)
    def __mul__(self, other): return mul(self, other)
    def __rmul__(self, other): return mul(other, self)
    def __truediv__(self, other): return div(self, other)
    def __neg__(self): return neg(self)
    def __matmul__(self, other): return matmul(self, other)
    def __getitem__(self, index): return getitem(self, index)

    def sum(self, axis: Optional[int] = None) -> "Tensor":
        return tsum(self, axis)

    def mean(self) -> "Tensor":
        return tsum(self) * (1.0 / self.size)

    def max(self, axis: int) -> "Tensor":
        return tmax(self, axis)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def expand(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return expand(self, shape)

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def tanh(self) -> "Tensor": return tanh(self)
    def sigmoid(self) -> "Tensor": return sigmoid(self)
    def relu(self) -> "Tensor": return relu(self)
    def exp(self) -> "Tensor": return exp(self)
    def log(self) -> "Tensor": return log(self)


def _topological(root: Tensor) -> list:
    order: list = []
    seen: set = set()
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def as_tensor(x: ArrayLike) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def _node(data: np.ndarray, parents: tuple, backward: Callable[[np.ndarray], tuple]) -> Tensor:
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    return out


# -- elementwise ---------------------------------------------------------

def _pair(op: str, a: ArrayLike, b: ArrayLike) -> tuple[Tensor, Tensor, tuple]:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape == b.shape:
        return a, b, a.shape
    if b.size == 1:
        return a, b, a.shape
    if a.size == 1:
        return a, b, b.shape
    raise ShapeError(op, a.shape, b.shape)


def _scalar_view(t: Tensor, shape: tuple) -> np.ndarray:
    return t.data if t.shape == shape else t.data.reshape(())


def _reduce_to(g: np.ndarray, t: Tensor) -> np.ndarray:
    if g.shape == t.shape:
        return g
    return np.asarray(g.sum()).reshape(t.shape)


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b, shape = _pair("add", a, b)
    out = _scalar_view(a, shape) + _scalar_view(b, shape)
    return _node(out, (a, b), lambda g: (_reduce_to(g, a), _reduce_to(g, b)))


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b, shape = _pair("sub", a, b)
    out = _scalar_view(a, shape) - _scalar_view(b, shape)
    return _node(out, (a, b), lambda g: (_reduce_to(g, a), _reduce_to(-g, b)))


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b, shape = _pair("mul", a, b)
    av, bv = _scalar_view(a, shape), _scalar_view(b, shape)
    return _node(av * bv, (a, b), lambda g: (_reduce_to(g * bv, a), _reduce_to(g * av, b)))


def div(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b, shape = _pair("div", a, b)
    av, bv = _scalar_view(a, shape), _scalar_view(b, shape)
    return _node(
        av / bv, (a, b),
        lambda g: (_reduce_to(g / bv, a), _reduce_to(-g * av / (bv * bv), b)),
    )


def neg(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    return _node(-a.data, (a,), lambda g: (-g,))


def tanh(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    y = np.tanh(a.data)
    return _node(y, (a,), lambda g: (g * (1.0 - y * y),))


def sigmoid(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    x = a.data
    # split form avoids overflow in exp for large |x|
    e = np.exp(-np.abs(x))
    y = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return _node(y, (a,), lambda g: (g * y * (1.0 - y),))


def relu(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    return _node(np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,))


def exp(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    y = np.exp(a.data)
    return _node(y, (a,), lambda g: (g * y,))


def log(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    return _node(np.log(a.data), (a,), lambda g: (g / a.data,))


_ELEMENTWISE = {
    "add": add, "sub": sub, "mul": mul, "div": div,
    "tanh": tanh, "sigmoid": sigmoid, "relu": relu, "exp": exp, "log": log, "neg": neg,
}


def elementwise(op: str, *inputs: ArrayLike) -> Tensor:
    """Dispatch an elementwise op by name (``add``, ``mul``, ``tanh`` ...)."""
    try:
        fn = _ELEMENTWISE[op]
    except KeyError:
        raise ValueError(f"unknown elementwise op {op!r}; expected one of {sorted(_ELEMENTWISE)}") from None
    return fn(*inputs)


# -- linear algebra and shape ops ------------------------------------------

def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)
    av, bv = a.data, b.data
    return _node(av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def tsum(a: ArrayLike, axis: Optional[int] = None) -> Tensor:
    a = as_tensor(a)
    if axis is None:
        return _node(np.asarray(a.data.sum()), (a,), lambda g: (np.broadcast_to(g, a.shape).copy(),))
    out = a.data.sum(axis=axis)
    return _node(out, (a,), lambda g: (np.broadcast_to(np.expand_dims(g, axis), a.shape).copy(),))


def tmax(a: ArrayLike, axis: int) -> Tensor:
    """Max along ``axis``; gradient flows to the first maximal element."""
    a = as_tensor(a)
    if a.shape[axis] == 0:
        raise ShapeError("max over empty axis", a.shape)
    idx = np.expand_dims(np.argmax(a.data, axis=axis), axis)
    out = np.take_along_axis(a.data, idx, axis=axis).squeeze(axis)

    def backward(g):
        grad = np.zeros_like(a.data)
        np.put_along_axis(grad, idx, np.expand_dims(g, axis), axis=axis)
        return (grad,)

    return _node(out, (a,), backward)


def reshape(a: ArrayLike, shape: tuple) -> Tensor:
    a = as_tensor(a)
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise ShapeError("reshape", a.shape, tuple(shape)) from None
    return _node(out, (a,), lambda g: (g.reshape(a.shape),))


def transpose(a: ArrayLike, axes: Optional[tuple] = None) -> Tensor:
    a = as_tensor(a)
    out = np.transpose(a.data, axes)
    inv = None if axes is None else tuple(np.argsort(axes))
    return _node(out, (a,), lambda g: (np.transpose(g, inv),))


def expand(a: ArrayLike, shape: tuple) -> Tensor:
    """Explicit numpy-style broadcast to ``shape``; backward sums the copies."""
    a = as_tensor(a)
    shape = tuple(shape)
    try:
        out = np.broadcast_to(a.data, shape)
    except ValueError:
        raise ShapeError("expand", a.shape, shape) from None
    lead = len(shape) - a.ndim
    summed = tuple(range(lead)) + tuple(
        lead + i for i, d in enumerate(a.shape) if d == 1 and shape[lead + i] != 1
    )

    def backward(g):
        r = g.sum(axis=summed, keepdims=True) if summed else g
        return (r.reshape(a.shape),)

    return _node(out, (a,), backward)


def getitem(a: ArrayLike, index) -> Tensor:
    a = as_tensor(a)
    out = a.data[index]

    basic = all(isinstance(i, (int, slice)) for i in (index if isinstance(index, tuple) else (index,)))

    def backward(g):
        grad = np.zeros_like(a.data)
        if basic:
            grad[index] = g
        else:
            np.add.at(grad, index, g)
        return (grad,)

    return _node(np.array(out, dtype=np.float64), (a,), backward)


def take_rows(table: Tensor, indices) -> Tensor:
    """Row lookup: ``table[indices]`` for a rank-2 table; output is ``indices.shape + (D,)``."""
    idx = np.asarray(indices, dtype=np.int64)
    if table.ndim != 2:
        raise ShapeError("take_rows (table must be rank 2)", table.shape)
    out = table.data[idx]
    dim = table.shape[1]

    def backward(g):
        grad = np.zeros_like(table.data)
        np.add.at(grad, idx.reshape(-1), g.reshape(-1, dim))
        return (grad,)

    return _node(out, (table,), backward)


def gather(a: Tensor, flat_indices) -> Tensor:
    """Pick elements of the flattened tensor at ``flat_indices``."""
    idx = np.asarray(flat_indices, dtype=np.int64)
    out = a.data.reshape(-1)[idx]

    def backward(g):
        grad = np.zeros(a.size)
        np.add.at(grad, idx.reshape(-1), g.reshape(-1))
        return (grad.reshape(a.shape),)

    return _node(out, (a,), backward)


def concat(tensors: Sequence[ArrayLike], axis: int = -1) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in ts], axis=axis)
    except ValueError:
        raise ShapeError("concat", *[t.shape for t in ts]) from None
    sizes = np.cumsum([t.shape[axis] for t in ts])[:-1]
    return _node(out, tuple(ts), lambda g: tuple(np.split(g, sizes, axis=axis)))


def stack(tensors: Sequence[ArrayLike], axis: int = 0) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    try:
        out = np.stack([t.data for t in ts], axis=axis)
    except ValueError:
        raise ShapeError("stack", *[t.shape for t in ts]) from None
    n = len(ts)
    return _node(
        out, tuple(ts),
        lambda g: tuple(np.squeeze(p, axis=axis) for p in np.split(g, n, axis=axis)),
    )


# -- normalisers -----------------------------------------------------------

def _check_axis(op: str, a: Tensor, axis: int) -> None:
    if a.ndim == 0 or a.shape[axis] == 0:
        raise ShapeError(f"{op} over empty axis", a.shape)


def log_sum_exp(a: ArrayLike, axis: int = -1) -> Tensor:
    """Max-shifted ``log(sum(exp(a)))`` along ``axis``."""
    a = as_tensor(a)
    _check_axis("log_sum_exp", a, axis)
    m = np.max(a.data, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    s = np.sum(np.exp(a.data - m), axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        out_k = np.log(s) + m
    out = np.squeeze(out_k, axis=axis)

    def backward(g):
        with np.errstate(invalid="ignore"):
            w = np.exp(a.data - out_k)
        w = np.nan_to_num(w, nan=0.0)
        return (np.expand_dims(g, axis) * w,)

    return _node(out, (a,), backward)


def softmax(a: ArrayLike, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    _check_axis("softmax", a, axis)
    z = a.data - np.max(a.data, axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return _node(y, (a,), backward)


def log_softmax(a: ArrayLike, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    _check_axis("log_softmax", a, axis)
    z = a.data - np.max(a.data, axis=axis, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=axis, keepdims=True))
    y = z - lse

    def backward(g):
        return (g - np.exp(y) * g.sum(axis=axis, keepdims=True),)

    return _node(y, (a,), backward)


def dropout(a: ArrayLike, rate: float, train: bool, rng: Optional["Rng"] = None) -> Tensor:
    """Inverted dropout. Identity in eval mode or at rate 0."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    a = as_tensor(a)
    if not train or rate == 0.0:
        return a
    if rng is None:
        raise ValueError("dropout in train mode needs an Rng")
    keep = (rng.random(a.shape) >= rate) / (1.0 - rate)
    return _node(a.data * keep, (a,), lambda g: (g * keep,))


# -- parameters and randomness ---------------------------------------------

def parameter(data, name: Optional[str] = None) -> Tensor:
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True, name=name)


def zero_grads(params: Iterable[Tensor]) -> None:
    for p in params:
        p.grad = None


class Rng:
    """Seeded PCG64 stream with named, independent substreams.

    ``Rng(7).child("char_cnn")`` always yields the same stream, and adding a new
    named child never perturbs the others.
    """

    algorithm = "PCG64"

    def __init__(self, seed: int, path: tuple = ()):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed)
        self.path = tuple(path)
        self.gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.path)))

    def child(self, name: str) -> "Rng":
        return Rng(self.seed, self.path + (zlib.crc32(name.encode("utf-8")),))

    def random(self, shape=None) -> np.ndarray:
        return self.gen.random(shape)

    def uniform(self, low: float, high: float, shape=None) -> np.ndarray:
        return self.gen.uniform(low, high, shape)

    def normal(self, scale: float, shape=None) -> np.ndarray:
        return self.gen.normal(0.0, scale, shape)

    def integers(self, low: int, high: Optional[int] = None, size=None):
        return self.gen.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self.gen.permutation(n)

    def choice(self, n: int, size=None, replace: bool = True, p=None):
        return self.gen.choice(n, size=size, replace=replace, p=p)

    def shuffle(self, items: list) -> list:
        order = self.gen.permutation(len(items))
        return [items[i] for i in order]


def glorot(rng: Rng, fan_in: int, fan_out: int, shape=None) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, shape if shape is not None else (fan_in, fan_out))


@contextmanager
def deterministic() -> Iterator[None]:
    """Pin BLAS to one thread so reductions run in a fixed order."""
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=1):
        yield
