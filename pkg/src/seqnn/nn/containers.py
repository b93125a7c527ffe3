"""Composite modules and table-manipulating modules."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .. import table as T
from .module import Container, Module


class Sequential(Container):
    """Feeds the input through its children in insertion order.

    Intermediate values are cached on the container itself (not read back from
    the children) so that children shared across time-steps still see the
    input that belongs to this container's forward.
    """

    def update_output(self, input):
        self._inputs = []
        x = input
        for i, m in enumerate(self.modules_):
            self._inputs.append(x)
            x = self._run_child(i, m.forward, x)
        return x

    def backward(self, input, grad_output):
        self._check_forwarded()
        g = grad_output
        for i in reversed(range(len(self.modules_))):
            g = self._run_child(i, self.modules_[i].backward, self._inputs[i], g)
        self.grad_input = g
        return g

    def update_grad_input(self, input, grad_output):
        raise NotImplementedError("Sequential overrides backward")


class ParallelTable(Container):
    """Applies child i to element i of the input table."""

    def _check(self, input):
        if not T.is_table(input) or len(input) != len(self.modules_):
            raise self._shape_error(
                f"expected a table of {len(self.modules_)} elements, got {T.describe(input)}"
            )

    def update_output(self, input):
        self._check(input)
        return [self._run_child(i, m.forward, x) for i, (m, x) in enumerate(zip(self.modules_, input))]

    def backward(self, input, grad_output):
        self._check_forwarded()
        self.grad_input = [
            self._run_child(i, m.backward, x, g)
            for i, (m, x, g) in enumerate(zip(self.modules_, input, grad_output))
        ]
        return self.grad_input


class ConcatTable(Container):
    """Applies every child to the same input; output is the table of results."""

    def update_output(self, input):
        return [self._run_child(i, m.forward, input) for i, m in enumerate(self.modules_)]

    def backward(self, input, grad_output):
        self._check_forwarded()
        g = None
        for i, (m, go) in enumerate(zip(self.modules_, grad_output)):
            g = T.add(g, self._run_child(i, m.backward, input, go))
        self.grad_input = g
        return g


class CAddTable(Module):
    """Elementwise sum of a table of equally shaped tensors."""

    def update_output(self, input):
        if not T.is_table(input) or not input:
            raise self._shape_error(f"expected a non-empty table, got {T.describe(input)}")
        shape = np.shape(input[0])
        if any(T.is_table(x) or np.shape(x) != shape for x in input):
            raise self._shape_error(f"table elements differ in shape: {T.describe(input)}")
        out = np.array(input[0], dtype=np.float64)
        for x in input[1:]:
            out = out + x
        return out

    def update_grad_input(self, input, grad_output):
        return [grad_output for _ in input]


class CMulTable(Module):
    """Elementwise product of a table of equally shaped tensors."""

    def update_output(self, input):
        if not T.is_table(input) or not input:
            raise self._shape_error(f"expected a non-empty table, got {T.describe(input)}")
        out = np.array(input[0], dtype=np.float64)
        for x in input[1:]:
            if np.shape(x) != out.shape:
                raise self._shape_error(f"table elements differ in shape: {T.describe(input)}")
            out = out * x
        return out

    def update_grad_input(self, input, grad_output):
        grads = []
        for i in range(len(input)):
            g = grad_output
            for j, x in enumerate(input):
                if j != i:
                    g = g * x
            grads.append(g)
        return grads


class SelectTable(Module):
    """Selects one element of a table. 1-based; negative indices count from the end."""

    def __init__(self, index: int):
        super().__init__()
        if index == 0:
            raise ConfigError("SelectTable index is 1-based and may not be 0")
        self.index = int(index)

    def _position(self, input):
        if not T.is_table(input):
            raise self._shape_error(f"expected a table, got {T.describe(input)}")
        n = len(input)
        pos = self.index - 1 if self.index > 0 else n + self.index
        if not 0 <= pos < n:
            raise self._shape_error(f"index {self.index} out of range for table of {n}")
        return pos

    def update_output(self, input):
        return input[self._position(input)]

    def update_grad_input(self, input, grad_output):
        pos = self._position(input)
        grads = [T.zeros_like(x) for x in input]
        grads[pos] = grad_output
        return grads

    def config(self):
        return {"index": self.index}
