from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from .. import table as T
from .module import Criterion


class ClassNLLCriterion(Criterion):
    """Mean negative log-likelihood of 1-based class targets.

    ``input`` is batch x C log-probabilities; ``target`` holds one class index
    in [1, C] per row.
    """

    def _targets(self, input, target):
        if T.is_table(input) or input.ndim != 2:
            raise ShapeError(f"ClassNLLCriterion: expected batch x C input, got {T.describe(input)}")
        t = np.asarray(target).astype(np.int64).reshape(-1)
        if t.shape[0] != input.shape[0]:
            raise ShapeError(
                f"ClassNLLCriterion: {t.shape[0]} targets for batch of {input.shape[0]}"
            )
        if t.min() < 1 or t.max() > input.shape[1]:
            raise IndexError(f"ClassNLLCriterion: target out of range [1, {input.shape[1]}]")
        return t - 1

    def update_output(self, input, target):
        t = self._targets(input, target)
        return float(-input[np.arange(len(t)), t].mean())

    def update_grad_input(self, input, target):
        t = self._targets(input, target)
        grad = np.zeros_like(input)
        grad[np.arange(len(t)), t] = -1.0 / len(t)
        return grad


class MSECriterion(Criterion):
    """Mean squared error over every element."""

    def update_output(self, input, target):
        return float(np.mean((input - target) ** 2))

    def update_grad_input(self, input, target):
        return 2.0 * (input - target) / input.size


class SequencerCriterion(Criterion):
    """Applies a criterion at every element of a sequence (table) and sums the losses."""

    def __init__(self, criterion: Criterion, size_average: bool = False):
        super().__init__()
        self.criterion = criterion
        self.size_average = size_average

    def _check(self, input, target):
        if not T.is_table(input) or len(input) != len(target):
            raise ShapeError("SequencerCriterion: input and target tables must have equal length")

    def update_output(self, input, target):
        self._check(input, target)
        loss = sum(self.criterion.forward(x, t) for x, t in zip(input, target))
        return loss / len(input) if self.size_average else loss

    def update_grad_input(self, input, target):
        self._check(input, target)
        scale = 1.0 / len(input) if self.size_average else 1.0
        grads = []
        for x, t in zip(input, target):
            g = self.criterion.backward(x, t)
            grads.append(g * scale if scale != 1.0 else g)
        return grads
