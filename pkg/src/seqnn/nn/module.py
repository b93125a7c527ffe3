"""Module and Criterion base classes.

Every transformation is a :class:`Module` with the forward/backward contract:
``forward`` caches and returns ``output``; ``backward`` returns ``grad_input``
and *accumulates* into the parameter gradients. Zeroing is explicit via
:meth:`Module.zero_grad_parameters`.
"""

from __future__ import annotations

import copy
from typing import Iterator

import numpy as np

from ..errors import ProtocolError, ShapeError

MODULE_TYPES: dict[str, type] = {}


class Module:
    # Subclasses flagged abstract stay out of the type registry.
    _abstract = True
    # True only for AbstractRecurrent subclasses; see is_recurrent().
    manages_time = False

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if not cls.__dict__.get("_abstract", False):
            MODULE_TYPES[cls.__name__] = cls

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.output = None
        self.grad_input = None
        self.training = True
        self._forwarded = False

    # -- forward / backward ------------------------------------------------

    def forward(self, input):
        self.output = self.update_output(input)
        self._forwarded = True
        return self.output

    def backward(self, input, grad_output):
        self._check_forwarded()
        self.grad_input = self.update_grad_input(input, grad_output)
        self.acc_grad_parameters(input, grad_output)
        return self.grad_input

    def __call__(self, input):
        return self.forward(input)

    def update_output(self, input):
        raise NotImplementedError

    def update_grad_input(self, input, grad_output):
        raise NotImplementedError

    def acc_grad_parameters(self, input, grad_output):
        pass

    def _check_forwarded(self):
        if not self._forwarded:
            raise ProtocolError(f"{type(self).__name__}: backward called before forward")

    def _shape_error(self, message):
        return ShapeError(f"{type(self).__name__}: {message}")

    # -- parameters ----------------------------------------------------------

    def _add_param(self, name, value, grad=None):
        self.params[name] = value
        self.grads[name] = np.zeros_like(value) if grad is None else grad

    def children(self) -> list["Module"]:
        return []

    def modules(self) -> Iterator["Module"]:
        """Pre-order walk over this module and every descendant."""
        yield self
        for child in self.children():
            yield from child.modules()

    def parameter_pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """(parameter, gradient) pairs, one per distinct parameter storage."""
        seen = set()
        pairs = []
        for m in self.modules():
            for name, p in m.params.items():
                if id(p) not in seen:
                    seen.add(id(p))
                    pairs.append((p, m.grads[name]))
        return pairs

    def parameters(self) -> list[np.ndarray]:
        return [p for p, _ in self.parameter_pairs()]

    def grad_parameters(self) -> list[np.ndarray]:
        return [g for _, g in self.parameter_pairs()]

    def zero_grad_parameters(self):
        for _, g in self.parameter_pairs():
            g.fill(0.0)

    def update_parameters(self, lr: float):
        for p, g in self.parameter_pairs():
            p -= lr * g

    # -- lifecycle -------------------------------------------------------------

    def shared_clone(self) -> "Module":
        """Structural copy whose parameters and gradients alias this module's."""
        clone = copy.copy(self)
        clone.output = None
        clone.grad_input = None
        clone._forwarded = False
        return clone

    def train(self, mode: bool = True):
        self.training = mode
        for child in self.children():
            child.train(mode)
        return self

    def eval(self):
        return self.train(False)

    def forget(self):
        for child in self.children():
            child.forget()

    def reinforce(self, reward):
        for child in self.children():
            child.reinforce(reward)

    # -- serialization hooks -----------------------------------------------------

    def config(self) -> dict:
        return {}

    def serial_children(self) -> list["Module"]:
        return self.children()

    @classmethod
    def from_config(cls, config: dict, children: list["Module"]):
        return cls(**config)

    def __repr__(self):
        cfg = ", ".join(f"{k}={v}" for k, v in self.config().items())
        return f"{type(self).__name__}({cfg})"


class Container(Module):
    _abstract = True

    def __init__(self, *modules):
        super().__init__()
        self.modules_ = list(modules)

    def add(self, module: Module):
        self.modules_.append(module)
        return self

    def children(self):
        return list(self.modules_)

    def __len__(self):
        return len(self.modules_)

    def __getitem__(self, i):
        return self.modules_[i]

    def shared_clone(self):
        clone = super().shared_clone()
        clone.modules_ = [m.shared_clone() for m in self.modules_]
        return clone

    @classmethod
    def from_config(cls, config, children):
        return cls(*children, **config)

    def _run_child(self, i, fn, *args):
        try:
            return fn(*args)
        except ShapeError as e:
            raise e.prefixed(f"{type(self).__name__}[{i + 1}]") from None


class Criterion:
    """Scalar cost. ``forward`` returns a float, ``backward`` a Value shaped like the input."""

    def __init__(self):
        self.output = None
        self.grad_input = None

    def forward(self, input, target) -> float:
        self.output = self.update_output(input, target)
        return self.output

    def backward(self, input, target):
        self.grad_input = self.update_grad_input(input, target)
        return self.grad_input

    def update_output(self, input, target):
        raise NotImplementedError

    def update_grad_input(self, input, target):
        raise NotImplementedError


def is_recurrent(module: Module) -> bool:
    """True if ``module`` is an AbstractRecurrent or contains one."""
    return any(m.manages_time for m in module.modules())
