from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Optional

from ..errors import ConfigError

MODELS = ("srn", "lstm", "recurrence")
TASKS = ("copy", "charlm", "sentiment", "attention-toy")


@dataclass
class TrainConfig:
    model: str = "lstm"
    hidden: int = 64
    rho: int = 8
    lr: float = 0.05
    epochs: int = 20
    batch_size: int = 16
    seed: int = 1
    task: str = "charlm"
    data_path: Optional[str] = None
    remember: bool = False
    # synthetic-task sizes
    seq_len: int = 5
    vocab: int = 4
    n_train: int = 512
    n_valid: int = 256
    n_step: int = 4
    # fill the wallclock_ms column (makes the CSV non-reproducible)
    timing: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        for name in ("hidden", "rho", "epochs", "batch_size", "seq_len", "vocab",
                     "n_train", "n_valid", "n_step"):
            v = getattr(self, name)
            if not isinstance(v, int) or v <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if not self.lr >= 0:
            raise ConfigError(f"lr must be non-negative, got {self.lr!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must fit in 64 bits")
        if self.task == "charlm" and not self.data_path:
            raise ConfigError("the charlm task needs a corpus path (--data)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})
