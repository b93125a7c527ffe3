"""Finite-difference gradient checking over a registry of toy architectures."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from ..nn import (
    Add, CAddTable, ClassNLLCriterion, CMul, CMulTable, ConcatTable, Convert, Criterion,
    Identity, Linear, LogSoftMax, LookupTable, Module, ParallelTable, SelectTable,
    Sequential, SequencerCriterion, Sigmoid, Tanh,
)
from ..nn.module import MODULE_TYPES
from ..rnn import LSTM, Recurrence, Recurrent, Recursor
from ..sequencers import GlimpseCrop, RecurrentAttention, ReinforceNormal, Repeater, Sequencer
from .. import table as T

EPS = 1e-6
FAIL_THRESHOLD = 1e-4


@dataclass
class GradCase:
    name: str
    module: Module
    input: Any
    criterion: Optional[Criterion] = None
    target: Any = None
    # drive a raw recurrent module step by step, then backward_through_time
    legacy: bool = False


@dataclass
class GradReport:
    name: str
    param_errors: list[float]
    input_error: Optional[float]
    module_types: set[str] = field(default_factory=set)

    @property
    def max_rel_error(self) -> float:
        errs = list(self.param_errors)
        if self.input_error is not None:
            errs.append(self.input_error)
        return max(errs, default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= FAIL_THRESHOLD


def relative_error(analytic, numeric) -> float:
    diff = max(float(np.max(np.abs(a - n))) for a, n in zip(T.leaves(analytic), T.leaves(numeric)))
    scale = max(
        max(float(np.max(np.abs(a))) for a in T.leaves(analytic)),
        max(float(np.max(np.abs(n))) for n in T.leaves(numeric)),
        1e-8,
    )
    return diff / scale


def finite_difference(f: Callable[[], float], arr: np.ndarray, eps: float = EPS) -> np.ndarray:
    """Central differences of ``f`` w.r.t. every entry of ``arr`` (perturbed in place)."""
    grad = np.zeros_like(arr, dtype=np.float64)
    flat = arr.reshape(-1)
    gflat = grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + eps
        up = f()
        flat[k] = orig - eps
        down = f()
        flat[k] = orig
        gflat[k] = (up - down) / (2 * eps)
    return grad


def _forward(case: GradCase):
    if case.legacy:
        case.module.forget()
        return [case.module.forward(x) for x in case.input]
    return case.module.forward(case.input)


def _scalar(case: GradCase, proj) -> float:
    out = _forward(case)
    if case.criterion is not None:
        return case.criterion.forward(out, case.target)
    return float(sum(np.sum(o * r) for o, r in zip(T.leaves(out), T.leaves(proj))))


def _analytic(case: GradCase, proj):
    m = case.module
    m.zero_grad_parameters()
    if case.legacy:
        m.forget()
        for x, g in zip(case.input, proj):
            m.forward(x)
            m.backward(x, g)
        grads = m.backward_through_time()
        return [grads[t] for t in sorted(grads)]
    out = m.forward(case.input)
    g = case.criterion.backward(out, case.target) if case.criterion is not None else proj
    return m.backward(case.input, g)


def module_types(module: Module) -> set[str]:
    """Registered type names reachable from ``module``, including step templates."""
    seen: set[str] = set()
    stack = [module]
    visited = set()
    while stack:
        m = stack.pop()
        if id(m) in visited:
            continue
        visited.add(id(m))
        if type(m).__name__ in MODULE_TYPES:
            seen.add(type(m).__name__)
        stack.extend(m.children())
        if m.manages_time:
            stack.extend(m._templates())
    return seen


def check(case: GradCase, seed: int = 0, eps: float = EPS, corrupt: bool = False) -> GradReport:
    rng = np.random.default_rng(seed)
    case.module.train()
    out = _forward(case)
    proj = None if case.criterion is not None else T.copy(out)
    if proj is not None:
        for leaf in T.leaves(proj):
            leaf[...] = rng.standard_normal(leaf.shape)

    grad_in = _analytic(case, proj)
    pairs = case.module.parameter_pairs()
    analytic = [g.copy() for _, g in pairs]
    if corrupt and analytic:
        analytic[0] = analytic[0] * 1.01 + 1e-3

    f = lambda: _scalar(case, proj)  # noqa: E731
    param_errors = [relative_error(a, finite_difference(f, p, eps)) for a, (p, _) in zip(analytic, pairs)]

    float_inputs = [x for x in T.leaves(case.input) if np.issubdtype(x.dtype, np.floating)]
    input_error = None
    if float_inputs:
        analytic_in = [g for x, g in zip(T.leaves(case.input), T.leaves(grad_in))
                       if np.issubdtype(x.dtype, np.floating)]
        numeric_in = [finite_difference(f, x, eps) for x in float_inputs]
        input_error = max(relative_error(a, n) for a, n in zip(analytic_in, numeric_in))
    return GradReport(case.name, param_errors, input_error, module_types(case.module))


# -- architecture registry ------------------------------------------------------------

def _seq(rng, T_, batch, size):
    return [rng.standard_normal((batch, size)) for _ in range(T_)]


def _linear(rng):
    m = Sequential(Linear(4, 3, rng=rng), Linear(3, 2, rng=rng))
    return GradCase("linear", m, rng.standard_normal((2, 4)))


def _mlp(rng):
    m = (Sequential().add(Convert("bchw", "bf")).add(Linear(8, 4, rng=rng)).add(Tanh())
         .add(Linear(4, 4, rng=rng)).add(Sigmoid()).add(Linear(4, 3, rng=rng)).add(LogSoftMax()))
    return GradCase("mlp", m, rng.standard_normal((2, 2, 2, 2)), ClassNLLCriterion(), np.array([1, 3]))


def _recurrent_module(rng, rho=None):
    return Recurrent(3, Linear(2, 3, rng=rng), Linear(3, 3, rng=rng), Sigmoid(), rho=rho)


def _perturb_start(m, rng):
    # a zero initial bias would leave its gradient path untested for scale
    m.params["bias"][...] = rng.standard_normal(m.params["bias"].shape) * 0.1
    return m


def _recurrent(rng):
    m = _perturb_start(_recurrent_module(rng), rng)
    return GradCase("recurrent", m, _seq(rng, 4, 2, 2), legacy=True)


def _recurrent_seq(rng):
    m = _perturb_start(_recurrent_module(rng), rng)
    return GradCase("sequencer-recurrent", Sequencer(m), _seq(rng, 4, 2, 2))


def _lstm(rng):
    return GradCase("lstm", Sequencer(LSTM(3, 4, rng=rng)), _seq(rng, 4, 2, 3))


def _lstm_legacy(rng):
    return GradCase("lstm-legacy", LSTM(3, 2, rng=rng), _seq(rng, 3, 2, 3), legacy=True)


def _lstm_composite(rng):
    return GradCase("lstm-composite", Sequencer(LSTM(2, 3, fused=False, rng=rng)), _seq(rng, 3, 2, 2))


def srn_step_module(n_index, hidden, rng=None):
    """{index(t), h(t-1)} -> sigmoid(lookup(index) + W h + b)"""
    return (Sequential()
            .add(ParallelTable(LookupTable(n_index, hidden, rng=rng), Linear(hidden, hidden, rng=rng)))
            .add(CAddTable())
            .add(Sigmoid()))


def _recurrence_srn(rng):
    n_index, hidden = 5, 4
    m = Sequencer(Sequential(
        Recurrence(srn_step_module(n_index, hidden, rng), hidden, 1),
        Linear(hidden, n_index, rng=rng),
        LogSoftMax(),
    ))
    inputs = [rng.integers(1, n_index + 1, size=2) for _ in range(4)]
    targets = [rng.integers(1, n_index + 1, size=2) for _ in range(4)]
    return GradCase("recurrence-srn", m, inputs, SequencerCriterion(ClassNLLCriterion()), targets)


def _lstm_stack(rng):
    m = Sequential(Sequencer(LSTM(3, 4, rng=rng)), Sequencer(LSTM(4, 3, rng=rng)))
    return GradCase("sequencer-lstm-stack", m, _seq(rng, 4, 2, 3))


def _lstm_stack_single(rng):
    m = Sequencer(Sequential(LSTM(3, 4, rng=rng), LSTM(4, 3, rng=rng)))
    return GradCase("sequencer-of-lstm-stack", m, _seq(rng, 4, 2, 3))


def _mixed(rng):
    m = Sequencer(Sequential(LSTM(3, 4, rng=rng), Linear(4, 4, rng=rng), LSTM(4, 3, rng=rng)))
    return GradCase("mixed-lstm-linear", m, _seq(rng, 4, 2, 3))


def _repeater(rng):
    m = _perturb_start(_recurrent_module(rng), rng)
    return GradCase("repeater", Repeater(m, 3), rng.standard_normal((2, 2)))


def _recursor(rng):
    m = Recursor(Sequential(Linear(3, 2, rng=rng), Tanh()))
    return GradCase("recursor", m, _seq(rng, 3, 2, 3), legacy=True)


def _recurrence_table(rng):
    # additive recurrence with a learned gate: {x, h} -> tanh(CMul(x) + h * Add(x))
    gate_bias = Add(3)
    gate_bias.params["bias"][...] = rng.standard_normal(3)
    rm = Sequential(
        ConcatTable(
            Sequential(SelectTable(1), CMul(3, rng=rng)),
            Sequential(ConcatTable(SelectTable(2), Sequential(SelectTable(1), gate_bias)), CMulTable()),
        ),
        CAddTable(),
        Tanh(),
    )
    return GradCase("recurrence-table-ops", Sequencer(Recurrence(rm, 3, 1)), _seq(rng, 3, 2, 3))


def _attention(rng):
    hidden = 3
    rnn = Recurrent(
        hidden,
        Sequential(CAddTable(), Linear(2, hidden, rng=rng)),
        Linear(hidden, hidden, rng=rng),
        Tanh(),
    )
    _perturb_start(rnn, rng)
    action = Sequential(Linear(hidden, 2, rng=rng), Tanh(), Identity())
    m = RecurrentAttention(rnn, action, 3, hidden)
    return GradCase("recurrent-attention", m, rng.standard_normal((2, 2)))


def _glimpse(rng):
    size = 4
    # exact pixel centres keep the crop away from rounding boundaries
    loc = -1.0 + 2.0 * rng.integers(0, size, size=(2, 2)) / (size - 1)
    m = Sequential(GlimpseCrop(size, 2), Linear(4, 2, rng=rng))
    return GradCase("glimpse", m, [rng.standard_normal((2, size, size)), loc])


def _reinforce(rng):
    node = ReinforceNormal(0.5, seed=0)
    node.deterministic = True
    m = Sequential(Linear(3, 2, rng=rng), node)
    m.reinforce(np.zeros(2))
    return GradCase("reinforce-normal-deterministic", m, rng.standard_normal((2, 3)))


ARCHITECTURES: dict[str, Callable[[np.random.Generator], GradCase]] = {
    "linear": _linear,
    "mlp": _mlp,
    "recurrent": _recurrent,
    "sequencer-recurrent": _recurrent_seq,
    "lstm": _lstm,
    "lstm-legacy": _lstm_legacy,
    "lstm-composite": _lstm_composite,
    "recurrence-srn": _recurrence_srn,
    "recurrence-table-ops": _recurrence_table,
    "sequencer-lstm-stack": _lstm_stack,
    "sequencer-of-lstm-stack": _lstm_stack_single,
    "mixed-lstm-linear": _mixed,
    "repeater": _repeater,
    "recursor": _recursor,
    "recurrent-attention": _attention,
    "glimpse": _glimpse,
    "reinforce-normal-deterministic": _reinforce,
}


def run_gradcheck(names=None, seed: int = 0, corrupt: bool = False) -> list[GradReport]:
    names = list(ARCHITECTURES) if not names else list(names)
    reports = []
    for i, name in enumerate(names):
        rng = np.random.default_rng([seed, i])
        reports.append(check(ARCHITECTURES[name](rng), seed=seed, corrupt=corrupt))
    return reports


def covered_types(reports) -> set[str]:
    out: set[str] = set()
    for r in reports:
        out |= r.module_types
    return out
