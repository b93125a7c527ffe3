"""Dense float64 tensors.

A tensor is a numpy ``ndarray`` of dtype float64 (or an integer dtype for index
tensors) with at least one dimension. The helpers here enforce that contract and
supply the handful of numeric kernels the modules build on.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from .errors import DimensionError

DTYPE = np.float64

SeedLike = Union[int, np.random.Generator, None]

_default_rng = np.random.default_rng(0)


def make_rng(seed: SeedLike = None) -> np.random.Generator:
    """Return a generator for ``seed``.

    Passing a Generator returns it unchanged; ``None`` yields the library-wide
    default generator (reseed it with :func:`manual_seed`).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return _default_rng
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def split_rng(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Independent child streams derived from ``rng``."""
    return list(rng.spawn(n))


def manual_seed(seed: int) -> None:
    global _default_rng
    _default_rng = make_rng(seed)


def _check_shape(shape: Sequence[int]) -> tuple[int, ...]:
    shape = tuple(int(s) for s in shape)
    if len(shape) == 0:
        raise DimensionError("zero-dimensional tensors are not allowed; use shape [1]")
    if any(s <= 0 for s in shape):
        raise DimensionError(f"shape extents must be positive, got {list(shape)}")
    return shape


def as_tensor(x, dtype=DTYPE) -> np.ndarray:
    """Copy-free conversion to a tensor; scalars become shape [1]."""
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    return arr


def fill_zeros(shape: Sequence[int]) -> np.ndarray:
    return np.zeros(_check_shape(shape), dtype=DTYPE)


def fill_randn(shape: Sequence[int], seed: SeedLike = None) -> np.ndarray:
    return make_rng(seed).standard_normal(_check_shape(shape))


def fill_uniform(shape: Sequence[int], low: float, high: float, seed: SeedLike = None) -> np.ndarray:
    return make_rng(seed).uniform(low, high, size=_check_shape(shape))


def random_int(lo: int, hi: int, shape: Sequence[int] = (1,), seed: SeedLike = None) -> np.ndarray:
    """Integers drawn uniformly from the closed range [lo, hi]."""
    if lo > hi:
        raise DimensionError(f"empty integer range [{lo}, {hi}]")
    return make_rng(seed).integers(lo, hi + 1, size=_check_shape(shape), dtype=np.int64)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"matmul: cannot multiply {list(a.shape)} by {list(b.shape)}"
        )
    return np.matmul(a, b)


def _same_shape(op: str, a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shape mismatch {list(a.shape)} vs {list(b.shape)}")


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _same_shape("add", a, b)
    return a + b


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _same_shape("hadamard", a, b)
    return a * b


def map_sigmoid(x: np.ndarray) -> np.ndarray:
    # two-branch form avoids overflow in exp for large |x|
    out = np.empty_like(x, dtype=DTYPE)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def map_tanh(x: np.ndarray) -> np.ndarray:
    return np.tanh(x)
