"""Serialize -> deserialize -> forward comparison over the gradcheck architectures."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import table as T
from ..nn import serialize
from ..nn.module import Module
from ..sequencers import ReinforceNormal
from .gradcheck import ARCHITECTURES, GradCase, module_types


@dataclass
class RoundtripReport:
    name: str
    identical_eval: bool
    # None when the module samples in training mode (not comparable)
    identical_train: bool | None
    module_types: set[str] = field(default_factory=set)

    @property
    def passed(self) -> bool:
        return self.identical_eval and self.identical_train is not False


def _stochastic(m: Module) -> bool:
    return any(isinstance(x, ReinforceNormal) and not x.deterministic for x in m.modules())


def _run(case: GradCase, module: Module, training: bool):
    module.train(training)
    module.forget()
    if case.legacy:
        out = [T.copy(module.forward(x)) for x in case.input]
    else:
        out = T.copy(module.forward(case.input))
    module.forget()
    return out


def _bit_equal(a, b) -> bool:
    la, lb = list(T.leaves(a)), list(T.leaves(b))
    return len(la) == len(lb) and all(
        x.shape == y.shape and x.tobytes() == y.tobytes() for x, y in zip(la, lb)
    )


def roundtrip_case(case: GradCase) -> RoundtripReport:
    clone = serialize.loads(serialize.dumps(case.module))
    eval_ok = _bit_equal(_run(case, case.module, False), _run(case, clone, False))
    train_ok = None
    if not _stochastic(case.module):
        train_ok = _bit_equal(_run(case, case.module, True), _run(case, clone, True))
    return RoundtripReport(case.name, eval_ok, train_ok, module_types(case.module))


def run_roundtrip(names=None, seed: int = 0) -> list[RoundtripReport]:
    names = list(ARCHITECTURES) if not names else list(names)
    reports = []
    for i, name in enumerate(names):
        rng = np.random.default_rng([seed, i])
        reports.append(roundtrip_case(ARCHITECTURES[name](rng)))
    return reports
