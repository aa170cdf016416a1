"""
Shared scalar/vector math used by the encoders, augmentors, decoders and losses
"""
from typing import Sequence

import numpy as np

from ..exceptions import ContractError, DomainError, ZeroVectorError
from .tensor import Tensor, TensorLike, _make, as_tensor, einsum, log_softmax, sqrt, tsum


def cosine_similarity(u: TensorLike, v: TensorLike) -> Tensor:
    """
    Cosine of the angle between two vectors, differentiable w.r.t. both

    Args:
        u (:obj:`Tensor`): vector

        v (:obj:`Tensor`): vector of the same length

    Returns:
        *similarity* (:obj:`Tensor`): scalar in [-1, 1]
    """
    u, v = as_tensor(u), as_tensor(v)
    if u.ndim != 1 or u.shape != v.shape or u.size < 1:
        raise ContractError(f"cosine_similarity needs two vectors of equal length, got {u.shape} and {v.shape}")
    if not np.any(u.values) or not np.any(v.values):
        raise ZeroVectorError("cosine_similarity is undefined for a zero vector")
    return einsum("i,i->", u, v) / (sqrt(tsum(u * u)) * sqrt(tsum(v * v)))


def normalize_rows(rows: TensorLike) -> Tensor:
    rows = as_tensor(rows)
    norms = np.sqrt((rows.values ** 2).sum(axis=1))
    if np.any(norms == 0):
        raise ZeroVectorError(f"Row {int(np.argmin(norms))} has zero norm")
    return rows / sqrt(tsum(rows * rows, axis=1, keepdims=True))


def cosine_matrix(left: TensorLike, right: TensorLike) -> Tensor:
    """Pairwise cosine similarities between the rows of two matrices (n_left x n_right)"""
    left, right = as_tensor(left), as_tensor(right)
    if left.ndim != 2 or right.ndim != 2 or left.shape[1] != right.shape[1]:
        raise ContractError(f"cosine_matrix dimension mismatch: {left.shape} vs {right.shape}")
    return einsum("id,jd->ij", normalize_rows(left), normalize_rows(right))


def softmax(v: TensorLike, tau: float = 1.0, axis: int = -1) -> Tensor:
    """
    Temperature-scaled softmax, stabilized by subtracting the maximum

    Args:
        v (:obj:`Tensor`): scores

        tau (:obj:`float`, optional): temperature. Must be positive. Defaults to 1
    """
    if not tau > 0:
        raise DomainError(f"Softmax temperature must be positive, got {tau}")
    v = as_tensor(v)
    shifted = v.values / tau
    shifted = shifted - shifted.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return ((out * (g - (g * out).sum(axis=axis, keepdims=True))) / tau,)

    return _make(out, (v,), backward)


def pool_mean(rows: TensorLike) -> Tensor:
    """Arithmetic mean over the rows of a matrix"""
    rows = as_tensor(rows)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise DomainError("pool_mean needs at least one row")
    return rows.mean(axis=0)


def linear(x: TensorLike, weight: Tensor, bias: Tensor = None) -> Tensor:
    """x @ weight + bias for a vector or a batch of row vectors"""
    x = as_tensor(x)
    subscripts = "i,ij->j" if x.ndim == 1 else "ni,ij->nj"
    out = einsum(subscripts, x, weight)
    return out if bias is None else out + bias


def nll(logits: Tensor, targets: Sequence[int]) -> Tensor:
    """Summed negative log-likelihood of integer targets under row-wise softmax of the logits"""
    logits = as_tensor(logits)
    targets = np.asarray(targets, dtype=np.int64)
    if logits.ndim == 1:
        logits = logits.reshape((1, -1))
    if logits.shape[0] != targets.shape[0]:
        raise ContractError("One target is needed per row of logits")
    picked = log_softmax(logits, axis=1)[np.arange(targets.shape[0]), targets]
    return -tsum(picked)


def probabilities(logits: TensorLike) -> np.ndarray:
    """Plain numpy softmax over the last axis, for decisions that need no gradient"""
    values = as_tensor(logits).values
    shifted = values - values.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)
