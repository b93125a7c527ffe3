"""Time-step machinery shared by every recurrent module.

An :class:`AbstractRecurrent` is fed one element of a sequence per ``forward``
call. Each step runs through its own clone of a step module; clones alias the
original's parameter and gradient storage so gradients from every step
accumulate into one buffer.

Two backward protocols are supported:

* online (used whenever the module sits inside a Sequencer, Recursor or any
  other AbstractRecurrent): after all forwards, ``backward`` is called once per
  step in reverse order and each call returns that step's valid ``grad_input``.
* legacy: ``backward`` directly after each ``forward`` only records the
  gradOutput and returns ``None``; :meth:`AbstractRecurrent.backward_through_time`
  then runs the BPTT and fills :attr:`AbstractRecurrent.grad_inputs`.

Only the last ``rho`` steps take part in BPTT; state flowing into the oldest
step of that window is treated as a constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from ..errors import ConfigError, ProtocolError
from ..nn.module import Module
from .. import table as T

DEFAULT_RHO = 9999


@dataclass
class StepState:
    clone: Module
    input: Any  # what the clone was fed: the step input joined with the previous state
    output: Any  # raw clone output
    visible: Any  # what forward returned to the caller
    state: Any  # carried into the next step
    grad_output: Optional[Any] = None
    grad_input: Optional[Any] = None


def set_online(module: Module) -> None:
    for m in module.modules():
        if m.manages_time:
            m.online = True


class AbstractRecurrent(Module):
    _abstract = True
    manages_time = True

    def __init__(self, rho: Optional[int] = None):
        super().__init__()
        rho = DEFAULT_RHO if rho is None else rho
        if not isinstance(rho, int) or rho < 1:
            raise ConfigError(f"rho must be a positive integer, got {rho!r}")
        self.rho = rho
        self.online = False
        self.step = 1
        self.grad_inputs: dict[int, Any] = {}
        self._states: dict[int, StepState] = {}
        self._clones: dict[int, Module] = {}
        self._clone_owner: dict[int, int] = {}
        self._pool: dict[int, list[Module]] = {}
        self._all_clones: list[Module] = []
        self._bwd_step: Optional[int] = None
        self._bwd_first = 1
        self._carry = None

    def _mark_nested_online(self):
        for child in self.children():
            set_online(child)

    # -- hooks for subclasses ----------------------------------------------------

    def _template(self, t: int) -> Module:
        raise NotImplementedError

    def _templates(self) -> list[Module]:
        raise NotImplementedError

    def _initial_state(self, x):
        return None

    def _step_input(self, x, prev_state, t):
        raise NotImplementedError

    def _split_output(self, out, t):
        """-> (visible output, state carried to step t + 1)"""
        raise NotImplementedError

    def _step_grad_output(self, grad_visible, grad_state, st: StepState, t):
        raise NotImplementedError

    def _split_grad_input(self, grad_in, t):
        """-> (gradient w.r.t. the step input, gradient w.r.t. the previous state)"""
        raise NotImplementedError

    # -- clones --------------------------------------------------------------------

    def shared_clone(self):
        # a recurrent module manages its own steps: its clone is itself
        return self

    def step_clone(self, t: int) -> Module:
        """Clone used at step ``t``; created (or recycled) on first use."""
        if t < 1:
            raise ConfigError(f"time-step must be >= 1, got {t}")
        clone = self._clones.get(t)
        if clone is None:
            template = self._template(t)
            pool = self._pool.setdefault(id(template), [])
            if pool:
                clone = pool.pop()
            else:
                clone = template.shared_clone()
                if clone is not template:
                    self._all_clones.append(clone)
            clone.train(self.training)
            self._clones[t] = clone
            self._clone_owner[t] = id(template)
        return clone

    def _release(self, t: int):
        self._states.pop(t, None)
        clone = self._clones.pop(t, None)
        if clone is not None:
            self._pool[self._clone_owner.pop(t)].append(clone)

    def _prune(self):
        keep = self.rho + 1 if self.training else 1
        newest = self.step - 1
        for t in [t for t in self._clones if t <= newest - keep]:
            self._release(t)
        for t in [t for t in self._states if t <= newest - keep]:
            self._states.pop(t)

    def live_states(self) -> int:
        return len(self._states)

    def live_clones(self) -> int:
        return len(self._all_clones)

    # -- forward ---------------------------------------------------------------------

    def forward(self, input):
        self._bwd_step = None
        self._carry = None
        t = self.step
        prev = self._initial_state(input) if t == 1 else self._states[t - 1].state
        step_input = self._step_input(input, prev, t)
        clone = self.step_clone(t)
        out = clone.forward(step_input)
        visible, state = self._split_output(out, t)
        self._states[t] = StepState(clone, step_input, out, visible, state)
        self.step += 1
        self._prune()
        self.output = visible
        self._forwarded = True
        return visible

    def update_output(self, input):
        return self.forward(input)

    # -- backward ------------------------------------------------------------------

    def _backward_step(self, t, st: StepState, grad_visible, keep_carry: bool):
        g = self._step_grad_output(grad_visible, self._carry, st, t)
        gin = st.clone.backward(st.input, g)
        gx, gstate = self._split_grad_input(gin, t)
        self._carry = gstate if keep_carry else None
        st.grad_input = gx
        return gx

    def backward(self, input, grad_output):
        if self.step == 1:
            raise ProtocolError(f"{type(self).__name__}: backward called before forward")
        if not self.online:
            return self._record_grad_output(grad_output)
        if self._bwd_step is None:
            self._bwd_step = self.step - 1
            self._bwd_first = max(1, self.step - self.rho)
            self._carry = None
        t = self._bwd_step
        if t < 1:
            raise ProtocolError(f"{type(self).__name__}: more backward calls than forwarded steps")
        self._bwd_step -= 1
        st = self._states.get(t)
        if st is None or t < self._bwd_first:
            gx = T.zeros_like(input)
        else:
            gx = self._backward_step(t, st, grad_output, keep_carry=t > self._bwd_first)
        self.grad_input = gx
        return gx

    def _record_grad_output(self, grad_output):
        st = self._states[self.step - 1]
        st.grad_output = T.add(st.grad_output, T.copy(grad_output))
        return None

    def backward_through_time(self):
        """BPTT over the last min(N, rho) steps using the recorded gradOutputs.

        Returns (and stores in ``grad_inputs``) a dict step -> gradient w.r.t.
        that step's input.
        """
        last = self.step - 1
        first = max(1, last - self.rho + 1)
        steps = [t for t in range(first, last + 1) if t in self._states]
        if not any(self._states[t].grad_output is not None for t in steps):
            raise ProtocolError(f"{type(self).__name__}: no gradOutputs recorded before backward_through_time")
        self._carry = None
        self.grad_inputs = {}
        for t in reversed(steps):
            st = self._states[t]
            gv = st.grad_output if st.grad_output is not None else T.zeros_like(st.visible)
            self.grad_inputs[t] = self._backward_step(t, st, gv, keep_carry=t > first)
            st.grad_output = None
        self.grad_inputs = dict(sorted(self.grad_inputs.items()))
        return self.grad_inputs

    # -- lifecycle -------------------------------------------------------------------

    def forget(self):
        for t in list(self._clones):
            self._release(t)
        self._states.clear()
        self.step = 1
        self._bwd_step = None
        self._carry = None
        self.grad_inputs = {}
        for template in self._templates():
            if template is not self:
                template.forget()

    def train(self, mode: bool = True):
        super().train(mode)
        for template in self._templates():
            template.train(mode)
        for clone in self._all_clones:
            clone.train(mode)
        return self

    def reinforce(self, reward):
        super().reinforce(reward)
        for clone in self._all_clones:
            clone.reinforce(reward)

    def config(self):
        return {"rho": self.rho}
