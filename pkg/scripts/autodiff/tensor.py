"""Dense float64 tensors recorded on a define-by-run tape.

Every op appends one node to the tape of its inputs; `Tape.backward` walks the
nodes in reverse id order, which is a valid reverse topological order because
inputs are always recorded before the ops that consume them.
"""
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import NonFiniteError, ShapeError

LAYER_NORM_EPS = 1e-5

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    """One recorded value. `data` is row-major float64, rank 1 to 3."""

    __slots__ = ("tape", "id", "op", "inputs", "data", "grad", "flops", "is_parameter", "_backward")

    def __init__(self, tape: "Tape", node_id: int, op: str, inputs: Tuple["Tensor", ...],
                 data: np.ndarray, backward: Optional[BackwardFn], flops: int, is_parameter: bool = False):
        self.tape = tape
        self.id = node_id
        self.op = op
        self.inputs = inputs
        self.data = data
        self.grad: Optional[np.ndarray] = None
        self.flops = flops
        self.is_parameter = is_parameter
        self._backward = backward

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def input_ids(self) -> List[int]:
        return [t.id for t in self.inputs]

    def __repr__(self) -> str:
        return f"<Tensor #{self.id} op={self.op} shape={self.shape}>"


class Tape:
    def __init__(self):
        self.nodes: List[Tensor] = []

    def _check(self, op: str, data: np.ndarray) -> np.ndarray:
        if not 1 <= data.ndim <= 3:
            raise ShapeError(f"{op}: tensors must have rank 1-3, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise NonFiniteError(f"{op}: produced a non-finite value")
        return data

    def record(self, op: str, inputs: Sequence[Tensor], data: np.ndarray,
               backward: Optional[BackwardFn], flops: int = 0, is_parameter: bool = False) -> Tensor:
        for t in inputs:
            if t.tape is not self:
                raise ValueError(f"{op}: input #{t.id} belongs to another tape")
        data = self._check(op, np.asarray(data, dtype=np.float64))
        node = Tensor(self, len(self.nodes), op, tuple(inputs), data, backward, flops, is_parameter)
        self.nodes.append(node)
        return node

    def constant(self, value) -> Tensor:
        return self.record("constant", (), np.array(value, dtype=np.float64), None)

    def parameter(self, value) -> Tensor:
        return self.record("parameter", (), np.array(value, dtype=np.float64), None, is_parameter=True)

    def backward(self, loss: Tensor) -> None:
        """Populate `.grad` on every node the loss depends on."""
        if loss.tape is not self:
            raise ValueError("loss belongs to another tape")
        if loss.data.size != 1:
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
        for node in self.nodes:
            node.grad = None
        loss.grad = np.ones_like(loss.data)
        for node in reversed(self.nodes[: loss.id + 1]):
            if node.grad is None or node._backward is None:
                continue
            input_grads = node._backward(node.grad)
            for parent, g in zip(node.inputs, input_grads):
                if g is None:
                    continue
                if not np.all(np.isfinite(g)):
                    raise NonFiniteError(f"backward of {node.op} (#{node.id}) produced a non-finite gradient")
                parent.grad = g if parent.grad is None else parent.grad + g

    @property
    def total_flops(self) -> int:
        return sum(node.flops for node in self.nodes)


def _same_tape(*tensors: Tensor) -> Tape:
    return tensors[0].tape


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    A, B = a.data, b.data
    m, k = A.shape
    n = B.shape[1]

    def backward(g):
        return g @ B.T, A.T @ g

    return _same_tape(a).record("matmul", (a, b), A @ B, backward, flops=2 * m * k * n)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; `b` may also be a 1-D bias broadcast over the rows of `a`."""
    if a.shape == b.shape:
        def backward(g):
            return g, g
    elif b.data.ndim == 1 and a.data.ndim == 2 and a.shape[1] == b.shape[0]:
        def backward(g):
            return g, g.sum(axis=0)
    else:
        raise ShapeError(f"add: incompatible shapes {a.shape} and {b.shape}")
    out = a.data + b.data
    return _same_tape(a).record("add", (a, b), out, backward, flops=out.size)


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"sub: incompatible shapes {a.shape} and {b.shape}")

    def backward(g):
        return g, -g

    out = a.data - b.data
    return _same_tape(a).record("sub", (a, b), out, backward, flops=out.size)


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)

    def backward(g):
        return (g * c,)

    return _same_tape(a).record("scale", (a,), a.data * c, backward, flops=a.data.size)


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0

    def backward(g):
        return (g * mask,)

    return _same_tape(a).record("relu", (a,), np.where(mask, a.data, 0.0), backward, flops=a.data.size)


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise ShapeError(f"transpose: expected a matrix, got shape {a.shape}")

    def backward(g):
        return (g.T,)

    return _same_tape(a).record("transpose", (a,), a.data.T.copy(), backward)


def concat_cols(parts: Sequence[Tensor]) -> Tensor:
    rows = {p.shape[0] for p in parts}
    if len(rows) != 1 or any(p.data.ndim != 2 for p in parts):
        raise ShapeError(f"concat_cols: row counts differ: {[p.shape for p in parts]}")
    bounds = np.cumsum([0] + [p.shape[1] for p in parts])

    def backward(g):
        return [g[:, bounds[i]:bounds[i + 1]] for i in range(len(parts))]

    out = np.concatenate([p.data for p in parts], axis=1)
    return _same_tape(*parts).record("concat_cols", tuple(parts), out, backward)


def concat_rows(parts: Sequence[Tensor]) -> Tensor:
    cols = {p.shape[1] for p in parts}
    if len(cols) != 1 or any(p.data.ndim != 2 for p in parts):
        raise ShapeError(f"concat_rows: column counts differ: {[p.shape for p in parts]}")
    bounds = np.cumsum([0] + [p.shape[0] for p in parts])

    def backward(g):
        return [g[bounds[i]:bounds[i + 1]] for i in range(len(parts))]

    out = np.concatenate([p.data for p in parts], axis=0)
    return _same_tape(*parts).record("concat_rows", tuple(parts), out, backward)


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    if a.data.ndim != 2 or not 0 <= start < stop <= a.shape[1]:
        raise ShapeError(f"slice_cols: bad range [{start}, {stop}) for shape {a.shape}")

    def backward(g):
        full = np.zeros_like(a.data)
        full[:, start:stop] = g
        return (full,)

    return _same_tape(a).record("slice_cols", (a,), a.data[:, start:stop].copy(), backward)


def slice_rows(a: Tensor, start: int, stop: int) -> Tensor:
    if a.data.ndim != 2 or not 0 <= start < stop <= a.shape[0]:
        raise ShapeError(f"slice_rows: bad range [{start}, {stop}) for shape {a.shape}")

    def backward(g):
        full = np.zeros_like(a.data)
        full[start:stop] = g
        return (full,)

    return _same_tape(a).record("slice_rows", (a,), a.data[start:stop].copy(), backward)


def repeat_rows(a: Tensor, count: int) -> Tensor:
    """Tile a 1×n row into count×n."""
    if a.data.ndim != 2 or a.shape[0] != 1 or count < 1:
        raise ShapeError(f"repeat_rows: expected a 1×n row, got shape {a.shape}")

    def backward(g):
        return (g.sum(axis=0, keepdims=True),)

    return _same_tape(a).record("repeat_rows", (a,), np.repeat(a.data, count, axis=0), backward)


def softmax_rows(x: Tensor) -> Tensor:
    if x.data.ndim != 2:
        raise ShapeError(f"softmax_rows: expected a matrix, got shape {x.shape}")
    shifted = x.data - x.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=1, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=1, keepdims=True)),)

    return _same_tape(x).record("softmax_rows", (x,), y, backward, flops=4 * y.size)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = LAYER_NORM_EPS) -> Tensor:
    if x.data.ndim != 2 or x.shape[1] < 2:
        raise ShapeError(f"layer_norm: expected m×d with d >= 2, got shape {x.shape}")
    d = x.shape[1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(f"layer_norm: gain/bias must have shape ({d},)")
    mean = x.data.mean(axis=1, keepdims=True)
    centered = x.data - mean
    var = (centered ** 2).mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = centered * inv_std
    out = x_hat * gain.data + bias.data

    def backward(g):
        d_hat = g * gain.data
        dx = inv_std * (d_hat - d_hat.mean(axis=1, keepdims=True)
                        - x_hat * (d_hat * x_hat).mean(axis=1, keepdims=True))
        return dx, (g * x_hat).sum(axis=0), g.sum(axis=0)

    return _same_tape(x).record("layer_norm", (x, gain, bias), out, backward, flops=7 * out.size)


def sum_all(a: Tensor) -> Tensor:
    def backward(g):
        return (np.full_like(a.data, g[0]),)

    return _same_tape(a).record("sum_all", (a,), np.array([a.data.sum()]), backward, flops=a.data.size)


def sum_squares(a: Tensor) -> Tensor:
    def backward(g):
        return (2.0 * a.data * g[0],)

    return _same_tape(a).record("sum_squares", (a,), np.array([np.sum(a.data ** 2)]), backward,
                                flops=2 * a.data.size)


def mse(a: Tensor, b: Tensor) -> Tensor:
    """Mean over all elements of (a - b)²."""
    if a.shape != b.shape:
        raise ShapeError(f"mse: incompatible shapes {a.shape} and {b.shape}")
    diff = a.data - b.data
    n = diff.size

    def backward(g):
        ga = 2.0 * diff * (g[0] / n)
        return ga, -ga

    return _same_tape(a).record("mse", (a, b), np.array([np.mean(diff ** 2)]), backward, flops=3 * n)
