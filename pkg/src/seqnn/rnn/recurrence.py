from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from ..nn.module import Module
from .. import table as T
from .abstract import AbstractRecurrent


def _zeros(batch, size):
    if isinstance(size, (list, tuple)):
        return [_zeros(batch, s) for s in size]
    return np.zeros((batch, int(size)))


class Recurrence(AbstractRecurrent):
    """Generic recurrence around a module mapping {input(t), output(t-1)} -> output(t).

    At step 1 the previous output is zeros of shape batch x ``output_size``
    (``output_size`` may be a nested list of sizes when the module emits a
    table). ``n_input_dim`` is the rank of one non-batch input element; the batch
    size is the leading extent of the first input tensor.
    """

    def __init__(self, module: Module, output_size, n_input_dim: int, rho=None):
        super().__init__(rho)
        self.module = module
        self.output_size = output_size
        self.n_input_dim = int(n_input_dim)
        self._mark_nested_online()

    def children(self):
        return [self.module]

    def _template(self, t):
        return self.module

    def _templates(self):
        return [self.module]

    def _initial_state(self, x):
        leaf = T.first_leaf(x)
        if np.ndim(leaf) < max(self.n_input_dim, 1):
            raise ShapeError(
                f"Recurrence: input rank {np.ndim(leaf)} below declared n_input_dim {self.n_input_dim}"
            )
        self._zero_state = _zeros(np.shape(leaf)[0], self.output_size)
        return self._zero_state

    def _step_input(self, x, prev_state, t):
        return [x, prev_state]

    def _split_output(self, out, t):
        if t == 1 and not T.same_structure(out, self._zero_state):
            raise ShapeError(
                f"Recurrence: module output {T.describe(out)} does not match "
                f"declared output_size {T.describe(self._zero_state)}"
            )
        return out, out

    def _step_grad_output(self, grad_visible, grad_state, st, t):
        return T.add(grad_visible, grad_state)

    def _split_grad_input(self, grad_in, t):
        return grad_in[0], grad_in[1]

    def config(self):
        return {"output_size": self.output_size, "n_input_dim": self.n_input_dim, "rho": self.rho}

    @classmethod
    def from_config(cls, config, children):
        return cls(children[0], **config)
