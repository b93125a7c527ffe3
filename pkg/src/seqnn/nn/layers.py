"""Leaf modules: affine maps, embeddings and elementwise transfers."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError
from ..tensor import fill_uniform, make_rng, map_sigmoid, map_tanh
from ..table import is_table
from .module import Module


def _positive(**sizes):
    for name, v in sizes.items():
        if not isinstance(v, (int, np.integer)) or v <= 0:
            raise ConfigError(f"{name} must be a positive integer, got {v!r}")


def _uniform_init(shape, fan_in, rng):
    bound = 1.0 / math.sqrt(fan_in)
    return fill_uniform(shape, -bound, bound, rng)


class Linear(Module):
    """y = x W^T + b, with W stored as output_size x input_size."""

    def __init__(self, input_size: int, output_size: int, bias: bool = True, rng=None):
        super().__init__()
        _positive(input_size=input_size, output_size=output_size)
        self.input_size = int(input_size)
        self.output_size = int(output_size)
        self.with_bias = bool(bias)
        rng = make_rng(rng)
        self._add_param("weight", _uniform_init((output_size, input_size), input_size, rng))
        if bias:
            self._add_param("bias", _uniform_init((output_size,), input_size, rng))

    @property
    def weight(self):
        return self.params["weight"]

    @property
    def bias(self):
        return self.params.get("bias")

    def update_output(self, input):
        if is_table(input) or input.ndim != 2 or input.shape[1] != self.input_size:
            raise self._shape_error(
                f"expected batch x {self.input_size} input, got shape {np.shape(input)}"
            )
        out = input @ self.params["weight"].T
        if self.with_bias:
            out = out + self.params["bias"]
        return out

    def update_grad_input(self, input, grad_output):
        return grad_output @ self.params["weight"]

    def acc_grad_parameters(self, input, grad_output):
        self.grads["weight"] += grad_output.T @ input
        if self.with_bias:
            self.grads["bias"] += grad_output.sum(axis=0)

    def config(self):
        return {"input_size": self.input_size, "output_size": self.output_size, "bias": self.with_bias}


class Add(Module):
    """Learned additive bias of a given size, initialized to zero."""

    def __init__(self, size: int):
        super().__init__()
        _positive(size=size)
        self.size = int(size)
        self._add_param("bias", np.zeros(self.size))

    def update_output(self, input):
        if input.shape[-1] != self.size:
            raise self._shape_error(f"expected trailing size {self.size}, got {input.shape}")
        return input + self.params["bias"]

    def update_grad_input(self, input, grad_output):
        return grad_output

    def acc_grad_parameters(self, input, grad_output):
        self.grads["bias"] += grad_output.reshape(-1, self.size).sum(axis=0)

    def config(self):
        return {"size": self.size}


class CMul(Module):
    """Elementwise product with a learned vector (a diagonal linear map)."""

    def __init__(self, size: int, rng=None):
        super().__init__()
        _positive(size=size)
        self.size = int(size)
        self._add_param("weight", _uniform_init((self.size,), self.size, make_rng(rng)))

    def update_output(self, input):
        if input.shape[-1] != self.size:
            raise self._shape_error(f"expected trailing size {self.size}, got {input.shape}")
        return input * self.params["weight"]

    def update_grad_input(self, input, grad_output):
        return grad_output * self.params["weight"]

    def acc_grad_parameters(self, input, grad_output):
        self.grads["weight"] += (grad_output * input).reshape(-1, self.size).sum(axis=0)

    def config(self):
        return {"size": self.size}


class Identity(Module):
    def update_output(self, input):
        return input

    def update_grad_input(self, input, grad_output):
        return grad_output


class Sigmoid(Module):
    def update_output(self, input):
        return map_sigmoid(input)

    def update_grad_input(self, input, grad_output):
        y = self.output
        return grad_output * y * (1.0 - y)


class Tanh(Module):
    def update_output(self, input):
        return map_tanh(input)

    def update_grad_input(self, input, grad_output):
        y = self.output
        return grad_output * (1.0 - y * y)


class LogSoftMax(Module):
    """Row-wise log-softmax over the last dimension."""

    def update_output(self, input):
        shifted = input - input.max(axis=-1, keepdims=True)
        return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))

    def update_grad_input(self, input, grad_output):
        return grad_output - np.exp(self.output) * grad_output.sum(axis=-1, keepdims=True)


class LookupTable(Module):
    """Embedding lookup. Indices are 1-based; row k of the weight is returned for index k."""

    def __init__(self, n_index: int, size: int, rng=None):
        super().__init__()
        _positive(n_index=n_index, size=size)
        self.n_index = int(n_index)
        self.size = int(size)
        # fan-in of a one-hot input is 1
        self._add_param("weight", _uniform_init((self.n_index, self.size), 1, make_rng(rng)))

    @property
    def weight(self):
        return self.params["weight"]

    def _indices(self, input):
        idx = np.asarray(input)
        if is_table(input) or not np.issubdtype(idx.dtype, np.number):
            raise self._shape_error(f"expected an index tensor, got {type(input).__name__}")
        idx = idx.astype(np.int64)
        if not np.array_equal(idx, np.asarray(input)):
            raise self._shape_error("indices must be integral")
        if idx.size and (idx.min() < 1 or idx.max() > self.n_index):
            raise IndexError(f"LookupTable: index out of range [1, {self.n_index}]")
        return idx - 1

    def update_output(self, input):
        return self.params["weight"][self._indices(input)]

    def update_grad_input(self, input, grad_output):
        return np.zeros(np.shape(input))

    def acc_grad_parameters(self, input, grad_output):
        idx = self._indices(input).reshape(-1)
        np.add.at(self.grads["weight"], idx, grad_output.reshape(-1, self.size))

    def config(self):
        return {"n_index": self.n_index, "size": self.size}


class Convert(Module):
    """Flattens every non-batch dimension: batch x ... -> batch x features.

    Only the ``'bf'`` output layout is supported; the input layout string is
    informational (any rank >= 2 with a leading batch dimension is accepted).
    """

    def __init__(self, input_format: str = "bchw", output_format: str = "bf"):
        super().__init__()
        if output_format != "bf" or not input_format.startswith("b"):
            raise ConfigError(f"Convert supports '{input_format}'->'bf' flattening only")
        self.input_format = input_format
        self.output_format = output_format

    def config(self):
        return {"input_format": self.input_format, "output_format": self.output_format}

    def update_output(self, input):
        return input.reshape(input.shape[0], -1)

    def update_grad_input(self, input, grad_output):
        return grad_output.reshape(input.shape)
