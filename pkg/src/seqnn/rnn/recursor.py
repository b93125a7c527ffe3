from __future__ import annotations

from ..nn.module import Module
from .abstract import AbstractRecurrent


class Recursor(AbstractRecurrent):
    """Presents any module through the step-wise recurrent interface.

    Step t runs through clone t of the decorated module (clones share parameters
    and gradients). Recurrent modules nested inside are not cloned; they keep
    track of their own steps.
    """

    def __init__(self, module: Module, rho=None):
        super().__init__(rho)
        self.module = module
        self._mark_nested_online()

    def children(self):
        return [self.module]

    def _template(self, t):
        return self.module

    def _templates(self):
        return [self.module]

    def _step_input(self, x, prev_state, t):
        return x

    def _split_output(self, out, t):
        return out, None

    def _step_grad_output(self, grad_visible, grad_state, st, t):
        return grad_visible

    def _split_grad_input(self, grad_in, t):
        return grad_in, None

    @classmethod
    def from_config(cls, config, children):
        return cls(children[0], **config)
