"""Decorators that apply a recurrent module to whole sequences (tables)."""

from __future__ import annotations

from ..errors import ConfigError, ProtocolError
from ..nn.module import Module
from ..rnn.abstract import set_online
from ..rnn.recursor import Recursor
from .. import table as T

REMEMBER_MODES = ("neither", "both")


def as_recurrent(module: Module) -> Module:
    """Wrap anything that is not itself an AbstractRecurrent in a Recursor."""
    return module if module.manages_time else Recursor(module)


class AbstractSequencer(Module):
    _abstract = True

    def __init__(self, module: Module):
        super().__init__()
        self.module = as_recurrent(module)
        set_online(self.module)

    def children(self):
        return [self.module]


class Sequencer(AbstractSequencer):
    """forward({x_1..x_T}) -> {y_1..y_T}; backward returns the full gradInput table.

    ``remember="neither"`` forgets the hidden state before every sequence;
    ``remember="both"`` carries it over from the previous sequence.
    """

    def __init__(self, module: Module, remember: str = "neither"):
        super().__init__(module)
        if remember not in REMEMBER_MODES:
            raise ConfigError(f"remember must be one of {REMEMBER_MODES}, got {remember!r}")
        self.remember = remember
        self._length = None

    def update_output(self, input):
        if not T.is_table(input):
            raise TypeError(f"Sequencer expects a table (list) input, got {type(input).__name__}")
        if self.remember == "neither":
            self.module.forget()
        self._length = len(input)
        return [self.module.forward(x) for x in input]

    def backward(self, input, grad_output):
        self._check_forwarded()
        if not T.is_table(grad_output) or len(grad_output) != self._length or len(input) != self._length:
            raise ProtocolError(
                f"Sequencer: backward over {len(grad_output)} steps after a forward of {self._length}"
            )
        grads = [None] * self._length
        for t in reversed(range(self._length)):
            grads[t] = self.module.backward(input[t], grad_output[t])
        self.grad_input = grads
        return grads

    def config(self):
        return {"remember": self.remember}

    @classmethod
    def from_config(cls, config, children):
        return cls(children[0], **config)


class Repeater(AbstractSequencer):
    """Applies the module ``n_step`` times to one unchanging input."""

    def __init__(self, module: Module, n_step: int):
        if not isinstance(n_step, int) or n_step < 1:
            raise ConfigError(f"Repeater n_step must be >= 1, got {n_step!r}")
        super().__init__(module)
        self.n_step = n_step

    def update_output(self, input):
        self.module.forget()
        return [self.module.forward(input) for _ in range(self.n_step)]

    def backward(self, input, grad_output):
        self._check_forwarded()
        if len(grad_output) != self.n_step:
            raise ProtocolError(f"Repeater: expected {self.n_step} gradOutputs, got {len(grad_output)}")
        g = None
        for t in reversed(range(self.n_step)):
            g = T.add(g, self.module.backward(input, grad_output[t]))
        self.grad_input = g
        return g

    def config(self):
        return {"n_step": self.n_step}

    @classmethod
    def from_config(cls, config, children):
        return cls(children[0], **config)
