from typing import Iterable

import numpy as np

from ..exceptions import NumericFailure
from ..numerics import Tensor


class SGD:
    """
    Stochastic gradient descent with global-norm clipping

    Args:
        params (:obj:`Iterable[Tensor]`): tensors to update in place from their *grad*

        learning_rate (:obj:`float`, optional): step size. Defaults to 0.05

        clip_norm (:obj:`float`, optional): gradients whose global norm exceeds this are rescaled to it.
        Defaults to 5.0
    """

    def __init__(self, params: Iterable[Tensor], learning_rate: float = 0.05, clip_norm: float = 5.0) -> None:
        self.params = list(params)
        self.learning_rate = learning_rate
        self.clip_norm = clip_norm

    def global_norm(self) -> float:
        return float(np.sqrt(sum(float((p.grad ** 2).sum()) for p in self.params)))

    def step(self) -> float:
        """Applies one update and clears the gradients. Returns the gradient norm before clipping"""
        norm = self.global_norm()
        if not np.isfinite(norm):
            raise NumericFailure("Gradient norm is not finite")
        scale = self.clip_norm / norm if norm > self.clip_norm else 1.0
        for p in self.params:
            p.values -= self.learning_rate * scale * p.grad
        self.zero_grad()
        return norm

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
