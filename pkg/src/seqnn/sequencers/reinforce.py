"""Stochastic action sampling trained with the score-function (REINFORCE) estimator."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, ProtocolError
from ..nn.criterion import ClassNLLCriterion
from ..nn.module import Criterion, Module
from ..tensor import make_rng


class ReinforceNormal(Module):
    """Samples z ~ N(mean, stdev^2) in training mode; returns the mean in evaluation.

    ``backward`` needs a reward (set through :meth:`reinforce`, one value per
    batch row) and returns ``-reward * (z - mean) / stdev**2`` plus any upstream
    gradOutput, i.e. the gradient that descends the negative expected reward.
    Setting ``deterministic`` makes training-mode forward return the mean too.
    """

    def __init__(self, stdev: float, seed=None, deterministic: bool = False):
        super().__init__()
        if not stdev > 0:
            raise ConfigError(f"ReinforceNormal stdev must be positive, got {stdev!r}")
        self.stdev = float(stdev)
        self.seed = seed
        self.rng = make_rng(seed)
        self.reward = None
        self.deterministic = bool(deterministic)

    def update_output(self, input):
        if self.training and not self.deterministic:
            return input + self.stdev * self.rng.standard_normal(input.shape)
        return np.array(input, copy=True)

    def reinforce(self, reward):
        self.reward = np.asarray(reward, dtype=np.float64).reshape(-1)

    def update_grad_input(self, input, grad_output):
        if self.reward is None:
            raise ProtocolError("ReinforceNormal: backward called before a reward was assigned")
        r = self.reward.reshape((-1,) + (1,) * (input.ndim - 1))
        grad = -r * (self.output - input) / self.stdev ** 2
        return grad if grad_output is None else grad + grad_output

    def config(self):
        return {"stdev": self.stdev, "seed": self.seed, "deterministic": self.deterministic}


class RewardCriterion(Criterion):
    """Classification NLL plus a REINFORCE reward broadcast.

    The reward per row is 1 when the argmax prediction equals the 1-based target
    and 0 otherwise. On ``backward`` the advantage ``scale * (reward - baseline)
    / batch`` is sent to every stochastic node of ``module`` through
    ``module.reinforce`` and the baseline (a running mean of the reward with the
    given momentum) is updated. The returned gradient is the NLL gradient for the
    differentiable path.
    """

    def __init__(self, module: Module, scale: float = 1.0, momentum: float = 0.9):
        super().__init__()
        self.module = module
        self.scale = scale
        self.momentum = momentum
        self.baseline = 0.0
        self.reward = None
        self.nll = ClassNLLCriterion()

    def update_output(self, input, target):
        t = np.asarray(target).reshape(-1)
        self.reward = (np.argmax(input, axis=1) + 1 == t).astype(np.float64)
        return self.nll.forward(input, target)

    def update_grad_input(self, input, target):
        grad = self.nll.backward(input, target)
        self.advantage = self.reward - self.baseline
        self.module.reinforce(self.scale * self.advantage / len(self.reward))
        self.baseline = self.momentum * self.baseline + (1.0 - self.momentum) * float(self.reward.mean())
        return grad
