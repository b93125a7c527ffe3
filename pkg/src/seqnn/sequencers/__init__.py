from .sequencer import REMEMBER_MODES, AbstractSequencer, Repeater, Sequencer, as_recurrent
from .attention import GlimpseCrop, RecurrentAttention
from .reinforce import ReinforceNormal, RewardCriterion

__all__ = [
    "REMEMBER_MODES", "AbstractSequencer", "Repeater", "Sequencer", "as_recurrent",
    "GlimpseCrop", "RecurrentAttention", "ReinforceNormal", "RewardCriterion",
]
