"""Helpers for Values: a tensor or a (possibly nested) list of Values."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def is_table(v) -> bool:
    return isinstance(v, (list, tuple))


def zeros_like(v):
    if is_table(v):
        return [zeros_like(x) for x in v]
    return np.zeros_like(v, dtype=np.float64)


def add(a, b):
    """Elementwise sum of two structurally equal Values. ``None`` acts as zero."""
    if a is None:
        return b
    if b is None:
        return a
    if is_table(a):
        if not is_table(b) or len(a) != len(b):
            raise ShapeError("cannot add Values of different structure")
        return [add(x, y) for x, y in zip(a, b)]
    if is_table(b) or a.shape != b.shape:
        raise ShapeError(f"cannot add {describe(a)} and {describe(b)}")
    return a + b


def copy(v):
    if is_table(v):
        return [copy(x) for x in v]
    return np.array(v, copy=True)


def leaves(v):
    if is_table(v):
        for x in v:
            yield from leaves(x)
    else:
        yield v


def first_leaf(v):
    return next(leaves(v))


def same_structure(a, b) -> bool:
    if is_table(a) or is_table(b):
        return (
            is_table(a) and is_table(b) and len(a) == len(b)
            and all(same_structure(x, y) for x, y in zip(a, b))
        )
    return np.shape(a) == np.shape(b)


def allclose(a, b, rtol=0.0, atol=0.0) -> bool:
    if not same_structure(a, b):
        return False
    return all(np.allclose(x, y, rtol=rtol, atol=atol) for x, y in zip(leaves(a), leaves(b)))


def max_abs_diff(a, b) -> float:
    if not same_structure(a, b):
        raise ShapeError(f"structure mismatch: {describe(a)} vs {describe(b)}")
    return max((float(np.max(np.abs(x - y))) for x, y in zip(leaves(a), leaves(b))), default=0.0)


def describe(v) -> str:
    if is_table(v):
        return "{" + ", ".join(describe(x) for x in v) + "}"
    return "x".join(str(s) for s in np.shape(v)) or "scalar"
