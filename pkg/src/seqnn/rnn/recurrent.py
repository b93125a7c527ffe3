from __future__ import annotations

from ..errors import ConfigError
from ..nn.containers import CAddTable, ParallelTable, Sequential
from ..nn.layers import Add
from ..nn.module import Module
from .. import table as T
from .abstract import AbstractRecurrent


class Recurrent(AbstractRecurrent):
    """Simple RNN assembled from user-supplied layers.

    Step 1 computes ``transfer(input_layer(x_1) + start)`` where ``start`` is a
    learned bias of ``start_size`` initialized to zero; later steps compute
    ``transfer(input_layer(x_t) + feedback_layer(h_{t-1}))``.
    """

    def __init__(self, start_size: int, input_layer: Module, feedback_layer: Module,
                 transfer: Module, rho=None):
        super().__init__(rho)
        sizes = {getattr(m, "output_size", None) for m in (input_layer, feedback_layer)}
        sizes.discard(None)
        if len(sizes) > 1:
            raise ConfigError(
                f"Recurrent: input layer and feedback layer output sizes differ {sorted(sizes)}"
            )
        if sizes and start_size not in sizes:
            raise ConfigError(f"Recurrent: start_size {start_size} != layer output size {sizes.pop()}")
        self.start_size = int(start_size)
        self.input_layer = input_layer
        self.feedback_layer = feedback_layer
        self.transfer = transfer
        self.start_module = Add(self.start_size)
        # the initial bias is exposed as this module's own parameter
        self.params = self.start_module.params
        self.grads = self.start_module.grads
        self.initial_module = Sequential(input_layer, self.start_module, transfer)
        self.recurrent_module = Sequential(
            ParallelTable(input_layer, feedback_layer), CAddTable(), transfer
        )
        self._mark_nested_online()

    def children(self):
        return [self.input_layer, self.feedback_layer, self.transfer]

    def _template(self, t):
        return self.initial_module if t == 1 else self.recurrent_module

    def _templates(self):
        return [self.initial_module, self.recurrent_module]

    def _step_input(self, x, prev_state, t):
        return x if t == 1 else [x, prev_state]

    def _split_output(self, out, t):
        return out, out

    def _step_grad_output(self, grad_visible, grad_state, st, t):
        return T.add(grad_visible, grad_state)

    def _split_grad_input(self, grad_in, t):
        if t == 1:
            return grad_in, None
        return grad_in[0], grad_in[1]

    def config(self):
        return {"start_size": self.start_size, "rho": self.rho}

    @classmethod
    def from_config(cls, config, children):
        return cls(config["start_size"], *children, rho=config["rho"])
