from .module import MODULE_TYPES, Container, Criterion, Module, is_recurrent
from .layers import (
    Add, CMul, Convert, Identity, Linear, LogSoftMax, LookupTable, Sigmoid, Tanh,
)
from .containers import (
    CAddTable, CMulTable, ConcatTable, ParallelTable, SelectTable, Sequential,
)
from .criterion import ClassNLLCriterion, MSECriterion, SequencerCriterion
from .train import train_epoch
from . import serialize

__all__ = [
    "MODULE_TYPES", "Container", "Criterion", "Module", "is_recurrent",
    "Add", "CMul", "Convert", "Identity", "Linear", "LogSoftMax", "LookupTable",
    "Sigmoid", "Tanh", "CAddTable", "CMulTable", "ConcatTable", "ParallelTable",
    "SelectTable", "Sequential", "ClassNLLCriterion", "MSECriterion",
    "SequencerCriterion", "train_epoch", "serialize",
]
