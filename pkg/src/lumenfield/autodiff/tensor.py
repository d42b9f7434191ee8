"""
Minimal reverse-mode automatic differentiation over dense float64 tensors.

Every operation on a Tensor that requires a gradient appends a node to the
tape. Nodes carry a monotonically increasing sequence number, so sorting the
nodes reachable from a root by that number reproduces insertion order and
gives a valid reverse topological traversal.
"""

import itertools
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import NonFiniteError, ShapeError

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence[float]]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_sequence = itertools.count()


@dataclass(eq=False)
class Node:
    """Record of one operation on the tape."""

    seq: int
    op: str
    parents: Tuple["Tensor", ...]
    backward_fn: BackwardFn


class Graph:
    """
    Append-only tape of operation records.

    Use as a context manager around one forward/backward pass; the training
    loop opens a fresh Graph every step and drops it afterwards.
    """

    def __init__(self):
        self.nodes: List[Node] = []

    def record(self, node: Node) -> None:
        self.nodes.append(node)

    def __contains__(self, node: Node) -> bool:
        return any(n is node for n in self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __enter__(self) -> "Graph":
        _state.graphs.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _state.graphs.remove(self)


class _TapeState(threading.local):
    """Per-thread graph stack and grad switch; each thread starts with grad on."""

    def __init__(self):
        self.graphs: List[Graph] = []
        self.grad_enabled: List[bool] = [True]


_state = _TapeState()


def current_graph() -> Optional[Graph]:
    """Return the innermost active Graph, if any."""
    return _state.graphs[-1] if _state.graphs else None


@contextmanager
def no_grad() -> Iterator[None]:
    """Evaluate without recording; results never require grad."""
    _state.grad_enabled.append(False)
    try:
        yield
    finally:
        _state.grad_enabled.pop()


class Tensor:
    """Dense n-dimensional float64 value with an optional gradient slot."""

    __slots__ = ("data", "requires_grad", "grad", "_node", "name")

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        name: Optional[str] = None,
        _node: Optional[Node] = None,
    ):
        if isinstance(data, Tensor):
            data = data.data
        array = np.array(data, dtype=np.float64)
        if not np.all(np.isfinite(array)):
            raise NonFiniteError(name or "tensor", "initial data contains NaN/Inf")
        self.data = array
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._node = _node
        self.name = name

    # -- introspection -----------------------------------------------------

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        grad = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{grad})"

    # -- operators -----------------------------------------------------------

    def __add__(self, other: ArrayLike) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return mul(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        return div(self, other)

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return div(other, self)

    def __neg__(self) -> "Tensor":
        return neg(self)

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        return matmul(self, other)

    def __getitem__(self, key) -> "Tensor":
        return index(self, key)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return tensor_sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        return mean(self, axis=axis, keepdims=keepdims)

    def exp(self) -> "Tensor":
        return exp(self)

    def log(self) -> "Tensor":
        return log(self)

    def relu(self) -> "Tensor":
        return relu(self)

    def sigmoid(self) -> "Tensor":
        return sigmoid(self)

    def softplus(self) -> "Tensor":
        return softplus(self)

    def square(self) -> "Tensor":
        return square(self)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


def as_tensor(value: ArrayLike) -> Tensor:
    """Wrap constants; Tensors pass through untouched."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _make(op: str, data: np.ndarray, parents: Sequence[Tensor], backward_fn: BackwardFn) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(op)
    requires_grad = _state.grad_enabled[-1] and any(p.requires_grad for p in parents)
    node = None
    if requires_grad:
        node = Node(next(_sequence), op, tuple(parents), backward_fn)
        graph = current_graph()
        if graph is not None:
            graph.record(node)
    # results own their buffer; bypass the copy in __init__
    result = Tensor.__new__(Tensor)
    result.data = np.asarray(data, dtype=np.float64)
    result.requires_grad = requires_grad
    result.grad = None
    result._node = node
    result.name = None
    return result


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to an operand's shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError as exc:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from exc


def _elementwise(op: str, a: ArrayLike, b: ArrayLike, fn, grad_fn) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(op, a, b)
    with np.errstate(all="ignore"):
        out = fn(a.data, b.data)

    def backward_fn(g: np.ndarray):
        ga, gb = grad_fn(g, a.data, b.data, out)
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _make(op, out, (a, b), backward_fn)


# -- binary ops --------------------------------------------------------------


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    return _elementwise("add", a, b, np.add, lambda g, x, y, o: (g, g))


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    return _elementwise("sub", a, b, np.subtract, lambda g, x, y, o: (g, -g))


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    return _elementwise("mul", a, b, np.multiply, lambda g, x, y, o: (g * y, g * x))


def div(a: ArrayLike, b: ArrayLike) -> Tensor:
    return _elementwise(
        "div", a, b, np.divide, lambda g, x, y, o: (g / y, -g * x / (y * y))
    )


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} @ {b.shape}")
    out = a.data @ b.data

    def backward_fn(g: np.ndarray):
        return g @ b.data.T, a.data.T @ g

    return _make("matmul", out, (a, b), backward_fn)


# -- unary ops ---------------------------------------------------------------


def neg(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    return _make("neg", -a.data, (a,), lambda g: (-g,))


def exp(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    with np.errstate(over="ignore"):
        out = np.exp(a.data)
    return _make("exp", out, (a,), lambda g: (g * out,))


def log(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(a.data)
    return _make("log", out, (a,), lambda g: (g / a.data,))


def relu(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0.0
    return _make("relu", np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,))


def sigmoid(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    out = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return _make("sigmoid", out, (a,), lambda g: (g * out * (1.0 - out),))


def softplus(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    out = np.logaddexp(0.0, a.data)
    slope = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return _make("softplus", out, (a,), lambda g: (g * slope,))


def square(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    return _make("square", a.data * a.data, (a,), lambda g: (2.0 * g * a.data,))


def clip(a: ArrayLike, lower: Optional[float] = None, upper: Optional[float] = None) -> Tensor:
    """Clamp values; the gradient passes only where the input lies inside the range."""
    a = as_tensor(a)
    out = np.clip(a.data, lower, upper)
    inside = np.ones(a.shape, dtype=bool)
    if lower is not None:
        inside &= a.data >= lower
    if upper is not None:
        inside &= a.data <= upper
    return _make("clip", out, (a,), lambda g: (g * inside,))


# -- reductions and structure ------------------------------------------------


def _normalize_axes(axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(ax % ndim for ax in axis)


def tensor_sum(a: ArrayLike, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = np.sum(a.data, axis=axis, keepdims=keepdims)
    axes = _normalize_axes(axis, a.ndim)

    def backward_fn(g: np.ndarray):
        if not keepdims:
            g = np.expand_dims(g, axes) if axes else g
        return (np.broadcast_to(g, a.shape).copy(),)

    return _make("sum", np.asarray(out), (a,), backward_fn)


def mean(a: ArrayLike, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    axes = _normalize_axes(axis, a.ndim)
    count = int(np.prod([a.shape[ax] for ax in axes])) if axes else 1
    out = np.mean(a.data, axis=axis, keepdims=keepdims)

    def backward_fn(g: np.ndarray):
        if not keepdims:
            g = np.expand_dims(g, axes) if axes else g
        return (np.broadcast_to(g / count, a.shape).copy(),)

    return _make("mean", np.asarray(out), (a,), backward_fn)


def concat(tensors: Sequence[ArrayLike], axis: int = -1) -> Tensor:
    parts = [as_tensor(t) for t in tensors]
    if not parts:
        raise ShapeError("concat: no operands")
    try:
        out = np.concatenate([p.data for p in parts], axis=axis)
    except ValueError as exc:
        raise ShapeError(f"concat: {exc}") from exc
    sizes = [p.shape[axis] for p in parts]
    splits = np.cumsum(sizes)[:-1]

    def backward_fn(g: np.ndarray):
        return tuple(np.split(g, splits, axis=axis))

    return _make("concat", out, parts, backward_fn)


def broadcast_to(a: ArrayLike, shape: Sequence[int]) -> Tensor:
    a = as_tensor(a)
    try:
        out = np.broadcast_to(a.data, tuple(shape)).copy()
    except ValueError as exc:
        raise ShapeError(f"broadcast: cannot broadcast {a.shape} to {tuple(shape)}") from exc
    return _make("broadcast", out, (a,), lambda g: (_unbroadcast(g, a.shape),))


def reshape(a: ArrayLike, shape: Sequence[int]) -> Tensor:
    a = as_tensor(a)
    try:
        out = a.data.reshape(tuple(shape))
    except ValueError as exc:
        raise ShapeError(f"reshape: {exc}") from exc
    return _make("reshape", out, (a,), lambda g: (g.reshape(a.shape),))


def index(a: ArrayLike, key) -> Tensor:
    """Basic or fancy indexing; repeated indices accumulate in the gradient."""
    a = as_tensor(a)
    out = np.array(a.data[key], dtype=np.float64)

    def backward_fn(g: np.ndarray):
        grad = np.zeros_like(a.data)
        np.add.at(grad, key, g)
        return (grad,)

    return _make("index", out, (a,), backward_fn)


def cumsum_exclusive(a: ArrayLike, axis: int = -1) -> Tensor:
    """out[i] = sum of a[j] for j < i along ``axis`` (out[0] == 0)."""
    a = as_tensor(a)
    moved = np.moveaxis(a.data, axis, -1)
    shifted = np.zeros_like(moved)
    shifted[..., 1:] = np.cumsum(moved[..., :-1], axis=-1)
    out = np.moveaxis(shifted, -1, axis)

    def backward_fn(g: np.ndarray):
        gm = np.moveaxis(g, axis, -1)
        # gradient of a[j] is the sum of g[i] over i > j
        rev = np.flip(gm, axis=-1)
        acc = np.zeros_like(rev)
        acc[..., 1:] = np.cumsum(rev[..., :-1], axis=-1)
        return (np.moveaxis(np.flip(acc, axis=-1), -1, axis),)

    return _make("cumsum", out, (a,), backward_fn)


FORWARD_OPS = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "div": div,
    "matmul": matmul,
    "exp": exp,
    "log": log,
    "relu": relu,
    "sigmoid": sigmoid,
    "softplus": softplus,
    "sum": tensor_sum,
    "mean": mean,
    "square": square,
    "concat": lambda *ts, axis=-1: concat(ts, axis=axis),
    "broadcast": broadcast_to,
}


def forward_op(op: str, *operands, **kwargs) -> Tensor:
    """Apply a named primitive; unknown names raise ValueError."""
    try:
        fn = FORWARD_OPS[op]
    except KeyError:
        raise ValueError(f"unknown op '{op}'") from None
    return fn(*operands, **kwargs)


# -- backward ----------------------------------------------------------------


def backward(root: Tensor) -> None:
    """
    Accumulate d(root)/d(leaf) into ``grad`` of every reachable leaf.

    Args:
        root: Single-element tensor produced on the tape

    Raises:
        ShapeError: If root holds more than one element
    """
    if root.size != 1:
        raise ShapeError(f"backward needs a scalar root, got shape {root.shape}")
    if not root.requires_grad:
        return
    if root.is_leaf:
        root.grad = np.ones_like(root.data) if root.grad is None else root.grad + 1.0
        return

    graph = current_graph()
    if graph is not None and root._node not in graph:
        raise ValueError("backward root was not recorded on the active Graph")

    # collect every non-leaf tensor reachable from root, once each
    order: List[Tensor] = []
    seen = set()
    stack = [root]
    while stack:
        t = stack.pop()
        if t._node is None or id(t._node) in seen:
            continue
        seen.add(id(t._node))
        order.append(t)
        stack.extend(p for p in t._node.parents if p.requires_grad)
    order.sort(key=lambda t: t._node.seq, reverse=True)

    pending = {id(root): np.ones_like(root.data)}
    for t in order:
        g = pending.pop(id(t), None)
        if g is None:
            continue
        parent_grads = t._node.backward_fn(g)
        for parent, pg in zip(t._node.parents, parent_grads):
            if pg is None or not parent.requires_grad:
                continue
            if parent.is_leaf:
                parent.grad = pg.copy() if parent.grad is None else parent.grad + pg
            else:
                key = id(parent)
                pending[key] = pg if key not in pending else pending[key] + pg
