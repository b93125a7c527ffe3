"""Recurrent neural network modules built on a Module/Criterion core."""

from .errors import ConfigError, DimensionError, ProtocolError, SeqnnError, ShapeError
from .nn import *  # noqa: F401,F403
from .rnn import *  # noqa: F401,F403
from .sequencers import *  # noqa: F401,F403

__version__ = "0.1.0"
