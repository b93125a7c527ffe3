from .abstract import DEFAULT_RHO, AbstractRecurrent, StepState, set_online
from .lstm import LSTM, LSTMCell, lstm_cell_composite
from .recurrence import Recurrence
from .recurrent import Recurrent
from .recursor import Recursor

__all__ = [
    "DEFAULT_RHO", "AbstractRecurrent", "StepState", "set_online", "LSTM", "LSTMCell",
    "lstm_cell_composite", "Recurrence", "Recurrent", "Recursor",
]
