"""Synthetic datasets and the character corpus used by the trainers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..tensor import make_rng


def perplexity(mean_nll: float) -> float:
    return math.exp(mean_nll)


def gen_copy_task(T: int, vocab: int, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """``n`` sequences of ``T`` symbols in [1, vocab]; the target at every step is the input."""
    if T < 1 or vocab < 2 or n < 1:
        raise ConfigError(f"copy task needs T >= 1, vocab >= 2, n >= 1 (got {T}, {vocab}, {n})")
    inputs = make_rng(seed).integers(1, vocab + 1, size=(n, T))
    return inputs, inputs.copy()


def gen_majority_task(T: int, vocab: int, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Sequences labelled with their most frequent symbol (ties go to the smallest)."""
    if T < 1 or vocab < 2 or n < 1:
        raise ConfigError("majority task needs T >= 1, vocab >= 2, n >= 1")
    inputs = make_rng(seed).integers(1, vocab + 1, size=(n, T))
    counts = np.stack([(inputs == v).sum(axis=1) for v in range(1, vocab + 1)], axis=1)
    return inputs, counts.argmax(axis=1) + 1


def gen_attention_toy(n: int, seed, size: int = 8, contrast: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Noise images where one quadrant is brighter. Labels 1..4 = quadrant (row-major)."""
    if size < 2 or size % 2:
        raise ConfigError("attention toy images need an even size >= 2")
    rng = make_rng(seed)
    images = rng.uniform(0.0, 1.0, size=(n, size, size))
    labels = rng.integers(1, 5, size=n)
    h = size // 2
    for img, lab in zip(images, labels):
        r, c = divmod(int(lab) - 1, 2)
        img[r * h:(r + 1) * h, c * h:(c + 1) * h] += contrast
    return images, labels


_SENTENCES = [
    "the quick brown fox jumps over the lazy dog. ",
    "a recurrent network reads one character at a time. ",
    "the cat sat on the mat and the dog sat on the log. ",
    "gradients flow backwards through time. ",
    "every step shares the same weights. ",
    "she sells sea shells by the sea shore. ",
]


def make_tiny_corpus(seed: int = 0, n_bytes: int = 10 * 1024) -> str:
    """Repetitive English-like text of exactly ``n_bytes`` ASCII characters."""
    rng = make_rng(seed)
    parts, total = [], 0
    while total < n_bytes:
        s = _SENTENCES[int(rng.integers(len(_SENTENCES)))]
        parts.append(s)
        total += len(s)
    return "".join(parts)[:n_bytes]


@dataclass
class CharCorpus:
    """Character vocabulary (1-based, sorted) and the encoded text."""

    chars: list[str]
    data: np.ndarray

    @classmethod
    def from_text(cls, text: str) -> "CharCorpus":
        if not text:
            raise ConfigError("corpus is empty")
        chars = sorted(set(text))
        if len(chars) < 2:
            raise ConfigError("corpus vocabulary must contain at least 2 symbols")
        index = {ch: i + 1 for i, ch in enumerate(chars)}
        return cls(chars, np.array([index[ch] for ch in text], dtype=np.int64))

    @classmethod
    def from_file(cls, path) -> "CharCorpus":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def from_vocab(cls, chars: list[str], text: str) -> "CharCorpus":
        index = {ch: i + 1 for i, ch in enumerate(chars)}
        unknown = set(text) - set(index)
        if unknown:
            raise ConfigError(f"text contains symbols outside the vocabulary: {sorted(unknown)[:5]}")
        return cls(list(chars), np.array([index[ch] for ch in text], dtype=np.int64))

    @property
    def vocab_size(self) -> int:
        return len(self.chars)

    def decode(self, indices) -> str:
        return "".join(self.chars[int(i) - 1] for i in indices)

    def split(self, train_frac: float = 0.9) -> tuple[np.ndarray, np.ndarray]:
        cut = int(len(self.data) * train_frac)
        return self.data[:cut], self.data[cut:]


def stream_windows(data: np.ndarray, batch: int, length: int):
    """Cut ``data`` into ``batch`` parallel streams and yield (inputs, targets) windows.

    Each window is a list of ``length`` index tensors of shape (batch,); targets
    are the inputs shifted by one character. Trailing characters that do not
    fill a complete window are dropped.
    """
    per_stream = (len(data) - 1) // batch
    if per_stream < length:
        batch = max(1, (len(data) - 1) // length)
        per_stream = (len(data) - 1) // batch
    if per_stream < 1:
        raise ConfigError("not enough data for a single window")
    length = min(length, per_stream)
    xs = data[:batch * per_stream].reshape(batch, per_stream)
    ys = data[1:batch * per_stream + 1].reshape(batch, per_stream)
    for start in range(0, per_stream - length + 1, length):
        yield ([xs[:, start + t] for t in range(length)],
               [ys[:, start + t] for t in range(length)])
