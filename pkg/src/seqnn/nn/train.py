from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..tensor import make_rng
from .module import Criterion, Module


def _example(data, idx):
    # tensors are sliced to a batch of one; lists (e.g. of sequences) are indexed
    if isinstance(data, np.ndarray):
        return data[idx:idx + 1]
    return data[idx]


def train_epoch(module: Module, criterion: Criterion, inputs, targets, lr: float = 0.1, rng=None) -> float:
    """One epoch of sampled single-example SGD; returns the mean loss.

    Each iteration draws an example uniformly with replacement, then runs
    forward, criterion forward/backward, zero_grad_parameters, backward and
    update_parameters(lr), in that order.
    """
    n = len(inputs)
    if n == 0:
        raise ConfigError("train_epoch: empty dataset")
    if len(targets) != n:
        raise ConfigError(f"train_epoch: {n} inputs but {len(targets)} targets")
    rng = make_rng(rng)
    total = 0.0
    for _ in range(n):
        idx = int(rng.integers(n))
        input, target = _example(inputs, idx), _example(targets, idx)
        output = module.forward(input)
        total += criterion.forward(output, target)
        grad_output = criterion.backward(output, target)
        module.zero_grad_parameters()
        module.backward(input, grad_output)
        module.update_parameters(lr)
    return total / n
