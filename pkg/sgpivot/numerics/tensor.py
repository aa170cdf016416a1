"""
Dense 64-bit tensors with reverse-mode differentiation

Every primitive operation executed while a :obj:`Tape` is active, and having at least one input that
tracks gradients, is appended to that tape. Because operations are appended as they run, the tape is
always in topological order and the backward pass is a single reversed sweep.

::

    from sgpivot.numerics import Tensor, Tape

    w = Tensor([1.0, 2.0, 3.0], requires_grad=True, name="w")
    with Tape() as tape:
        loss = (w * w).sum()
    gradients = tape.backward(loss)
    gradients[w]
  array([2., 4., 6.])

The active tape is thread-local: distinct tapes can be driven from distinct threads.
"""
import threading
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from ..exceptions import ContractError, DomainError, NumericFailure

FLOAT = np.float64

_state = threading.local()


def _tape_stack() -> list:
    if not hasattr(_state, "stack"):
        _state.stack = []
    return _state.stack


def active_tape():
    """Returns the tape currently recording on this thread (None when recording is off)"""
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tape:
    """Ordered record of primitive operations

    A tape can be run backward once. Use :meth:`reset` (or a new tape) for the next step.
    """

    def __init__(self) -> None:
        self.records = []  # type: List[Tensor]
        self.consumed = False

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, *args):
        _tape_stack().pop()

    def record(self, tensor) -> None:
        self.records.append(tensor)

    def reset(self) -> None:
        """Forgets every recorded operation so the tape can be reused"""
        for t in self.records:
            t._parents = ()
            t._backward = None
            t._tape = None
        self.records = []
        self.consumed = False

    def backward(self, loss, params: Iterable = (), accumulate: bool = True) -> Dict:
        """
        Back-propagates a scalar loss through the operations recorded on this tape

        Args:
            loss (:obj:`Tensor`): Scalar produced by operations on this tape

            params (:obj:`Iterable[Tensor]`, optional): Tensors that must appear in the returned table even if
            the loss does not depend on them (they get zero gradients)

            accumulate (:obj:`bool`, optional): Whether leaf gradients are also added to each leaf's *grad*.
            Defaults to True

        Returns:
            *gradients* (:obj:`dict`): Tensor -> numpy array with the gradient of the loss
        """
        if not isinstance(loss, Tensor) or loss.values.size != 1:
            raise ContractError("backward needs a scalar loss")
        if self.consumed:
            raise ContractError("This tape was already run backward. Reset it or record a new one")
        if loss._tape is not self and not (loss.requires_grad and loss._backward is None):
            raise ContractError("Loss was not produced on this tape")

        adjoints = {id(loss): np.ones_like(loss.values)}
        owners = {id(loss): loss}
        for node in reversed(self.records):
            g = adjoints.get(id(node))
            if g is None:
                continue
            parent_grads = node._backward(g)
            for parent, pg in zip(node._parents, parent_grads):
                if pg is None or not parent.tracks:
                    continue
                key = id(parent)
                if key in adjoints:
                    adjoints[key] = adjoints[key] + pg
                else:
                    adjoints[key] = pg
                    owners[key] = parent

        table = {}
        for key, tensor in owners.items():
            if tensor.requires_grad and tensor._backward is None:
                table[tensor] = adjoints[key]
                if accumulate:
                    tensor.grad = tensor.grad + adjoints[key]
        for p in params:
            if p not in table:
                table[p] = np.zeros_like(p.values)
        self.consumed = True
        return table


class no_grad:
    """Context manager that switches recording off (stop-gradient for generation passes)"""

    def __enter__(self):
        _tape_stack().append(None)
        return self

    def __exit__(self, *args):
        _tape_stack().pop()


class Tensor:
    """
    Dense row-major array of 64-bit reals

    Args:
        values (:obj:`array-like`): Values. Copied

        requires_grad (:obj:`bool`, optional): Whether this is a leaf whose gradient is wanted

        name (:obj:`str`, optional): Name used in reports and checkpoints
    """

    __slots__ = ("values", "requires_grad", "grad", "name", "_parents", "_backward", "_tape")
    __array_ufunc__ = None

    def __init__(self, values, requires_grad: bool = False, name: Optional[str] = None) -> None:
        self.values = np.array(values, dtype=FLOAT)
        if not np.all(np.isfinite(self.values)):
            raise DomainError(f"Tensor {name or ''} has non-finite values")
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(self.values) if requires_grad else None
        self.name = name
        self._parents = ()
        self._backward = None
        self._tape = None

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def tracks(self) -> bool:
        return self.requires_grad or self._backward is not None

    def item(self) -> float:
        return float(self.values.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.values.copy()

    def zero_grad(self) -> None:
        if self.requires_grad:
            self.grad = np.zeros_like(self.values)

    def detach(self):
        return Tensor(self.values)

    def __repr__(self):
        label = f"{self.name}, " if self.name else ""
        return f"Tensor({label}shape={self.shape})"

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

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return index(self, key)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        return reshape(self, shape[0] if len(shape) == 1 and isinstance(shape[0], tuple) else shape)


TensorLike = Union[Tensor, np.ndarray, float, int, Sequence]


def as_tensor(x: TensorLike) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def backward(loss: Tensor, params: Iterable = (), accumulate: bool = True) -> Dict:
    """Runs the tape that produced *loss* backward. See :meth:`Tape.backward`"""
    if not isinstance(loss, Tensor) or loss.values.size != 1:
        raise ContractError("backward needs a scalar loss")
    if loss._tape is None:
        raise ContractError("Loss is not reachable from any recorded operation")
    return loss._tape.backward(loss, params, accumulate)


def _make(values: np.ndarray, parents: tuple, backward) -> Tensor:
    values = np.asarray(values, dtype=FLOAT)
    if not np.all(np.isfinite(values)):
        raise NumericFailure("Operation produced non-finite values")
    out = Tensor.__new__(Tensor)
    out.values = values
    out.requires_grad = False
    out.grad = None
    out.name = None
    out._parents = ()
    out._backward = None
    out._tape = None
    tape = active_tape()
    if tape is not None and any(p.tracks for p in parents):
        out._parents = parents
        out._backward = backward
        out._tape = tape
        tape.record(out)
    return out


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _make(a.values + b.values, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _make(a.values - b.values, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _make(a.values * b.values, (a, b),
                 lambda g: (_unbroadcast(g * b.values, a.shape), _unbroadcast(g * a.values, b.shape)))


def div(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if np.any(b.values == 0):
        raise DomainError("Division by zero")
    return _make(a.values / b.values, (a, b),
                 lambda g: (_unbroadcast(g / b.values, a.shape),
                            _unbroadcast(-g * a.values / (b.values ** 2), b.shape)))


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.values)
    return _make(out, (a,), lambda g: (g * out,))


def log(a: Tensor) -> Tensor:
    if np.any(a.values <= 0):
        raise DomainError("log of a non-positive value")
    return _make(np.log(a.values), (a,), lambda g: (g / a.values,))


def sqrt(a: Tensor) -> Tensor:
    if np.any(a.values <= 0):
        raise DomainError("sqrt needs strictly positive values to be differentiable")
    out = np.sqrt(a.values)
    return _make(out, (a,), lambda g: (g * 0.5 / out,))


def relu(a: Tensor) -> Tensor:
    mask = (a.values > 0).astype(FLOAT)
    return _make(a.values * mask, (a,), lambda g: (g * mask,))


def sigmoid(a: Tensor) -> Tensor:
    out = np.exp(-np.logaddexp(0.0, -a.values))
    return _make(out, (a,), lambda g: (g * out * (1.0 - out),))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.values)
    return _make(out, (a,), lambda g: (g * (1.0 - out ** 2),))


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = a.values.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _make(out, (a,), backward)


def tmean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    count = a.values.size if axis is None else a.values.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def reshape(a: Tensor, shape: tuple) -> Tensor:
    return _make(a.values.reshape(shape), (a,), lambda g: (g.reshape(a.shape),))


def index(a: Tensor, key) -> Tensor:
    def backward(g):
        grad = np.zeros_like(a.values)
        np.add.at(grad, key, g)
        return (grad,)

    return _make(a.values[key], (a,), backward)


def take_rows(a: Tensor, rows: Sequence[int]) -> Tensor:
    """Gathers rows of a matrix (embedding lookup)"""
    return index(a, np.asarray(rows, dtype=np.int64))


def concat(tensors: Sequence[TensorLike], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=axis))

    return _make(np.concatenate([t.values for t in tensors], axis=axis), tuple(tensors), backward)


def stack(tensors: Sequence[TensorLike], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]

    def backward(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return _make(np.stack([t.values for t in tensors], axis=axis), tuple(tensors), backward)


def einsum(subscripts: str, *operands: TensorLike) -> Tensor:
    """
    Differentiable Einstein summation

    Only explicit-output subscripts (with '->') and operands without repeated indices are supported,
    which covers products, bilinear and trilinear forms.
    """
    operands = tuple(as_tensor(o) for o in operands)
    if "->" not in subscripts:
        raise ContractError("einsum needs explicit output subscripts")
    inputs, output = subscripts.replace(" ", "").split("->")
    inputs = inputs.split(",")
    if len(inputs) != len(operands):
        raise ContractError("einsum subscripts do not match the number of operands")
    for sub_k in inputs:
        if len(set(sub_k)) != len(sub_k):
            raise ContractError("einsum does not support repeated indices within an operand")

    values = np.einsum(subscripts, *[o.values for o in operands], optimize=len(operands) > 2)

    def backward(g):
        grads = []
        for k, operand in enumerate(operands):
            if not operand.tracks:
                grads.append(None)
                continue
            others = [inputs[m] for m in range(len(operands)) if m != k]
            available = set(output).union(*[set(s) for s in others])
            kept = "".join(c for c in inputs[k] if c in available)
            expr = ",".join([output] + others) + "->" + kept
            grad = np.einsum(expr, g, *[operands[m].values for m in range(len(operands)) if m != k],
                             optimize=len(operands) > 2)
            for axis, c in enumerate(inputs[k]):
                if c not in available:
                    grad = np.expand_dims(grad, axis)
            grads.append(np.broadcast_to(grad, operand.shape).copy())
        return tuple(grads)

    return _make(values, operands, backward)


_MATMUL_SUBSCRIPTS = {(1, 1): "i,i->", (1, 2): "i,ij->j", (2, 1): "ij,j->i", (2, 2): "ij,jk->ik"}


def matmul(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    key = (a.ndim, b.ndim)
    if key not in _MATMUL_SUBSCRIPTS:
        raise ContractError(f"matmul supports vectors and matrices only, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[0]:
        raise ContractError(f"matmul dimension mismatch: {a.shape} @ {b.shape}")
    return einsum(_MATMUL_SUBSCRIPTS[key], a, b)


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    out = a.values - logsumexp(a.values, axis=axis, keepdims=True)
    probs = np.exp(out)
    return _make(out, (a,), lambda g: (g - probs * g.sum(axis=axis, keepdims=True),))
