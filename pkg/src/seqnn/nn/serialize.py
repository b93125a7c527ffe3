"""Versioned flat-file model format.

Layout (all integers little-endian)::

    8 bytes   magic b"SEQNNMDL"
    u32       format version
    u32       header length in bytes
    ...       header: UTF-8 JSON {"meta": {...}, "module": <record>}
    u32       number of tensors
    per tensor: u32 ndim, ndim x u64 extents, float64 data (row-major)

A module record is ``{"type", "config", "params", "children"}`` where
``params`` maps each parameter name to an index into the tensor section, so
storage shared between modules is written once and re-aliased on load. A module
object that appears twice in the tree is written once and referenced
afterwards as ``{"ref": n}`` (n = pre-order position of its first occurrence).
Step caches of recurrent modules are never written.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np

from .module import MODULE_TYPES, Module

MAGIC = b"SEQNNMDL"
FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


def _encode(m: Module, memo: dict, tensors: list, tensor_index: dict) -> dict:
    if id(m) in memo:
        return {"ref": memo[id(m)]}
    memo[id(m)] = len(memo)
    params = {}
    for name, p in m.params.items():
        if id(p) not in tensor_index:
            tensor_index[id(p)] = len(tensors)
            tensors.append(p)
        params[name] = tensor_index[id(p)]
    return {
        "type": type(m).__name__,
        "config": m.config(),
        "params": params,
        "children": [_encode(c, memo, tensors, tensor_index) for c in m.serial_children()],
    }


def dumps(module: Module, meta: dict | None = None) -> bytes:
    tensors: list[np.ndarray] = []
    tree = _encode(module, {}, tensors, {})
    header = json.dumps({"meta": meta or {}, "module": tree}, sort_keys=True).encode("utf-8")
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<II", FORMAT_VERSION, len(header)))
    buf.write(header)
    buf.write(struct.pack("<I", len(tensors)))
    for t in tensors:
        buf.write(struct.pack("<I", t.ndim))
        buf.write(struct.pack(f"<{t.ndim}Q", *t.shape))
        buf.write(np.ascontiguousarray(t, dtype="<f8").tobytes())
    return buf.getvalue()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise FormatError("truncated model file")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _decode(rec: dict, memo: list, pending: list) -> Module:
    if "ref" in rec:
        return memo[rec["ref"]]
    slot = len(memo)
    memo.append(None)
    children = [_decode(c, memo, pending) for c in rec["children"]]
    cls = MODULE_TYPES.get(rec["type"])
    if cls is None:
        raise FormatError(f"unknown module type {rec['type']!r}")
    m = cls.from_config(rec["config"], children)
    memo[slot] = m
    pending.append((m, rec["params"]))
    return m


def loads_with_meta(data: bytes) -> tuple[Module, dict]:
    r = _Reader(data)
    if r.take(len(MAGIC)) != MAGIC:
        raise FormatError("not a seqnn model file")
    version, header_len = r.unpack("<II")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    try:
        header = json.loads(r.take(header_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"corrupt header: {exc}") from exc
    if not isinstance(header, dict) or not {"meta", "module"} <= header.keys():
        raise FormatError("header lacks meta/module entries")
    (count,) = r.unpack("<I")
    tensors = []
    for _ in range(count):
        (ndim,) = r.unpack("<I")
        shape = r.unpack(f"<{ndim}Q")
        n = int(np.prod(shape))
        tensors.append(np.frombuffer(r.take(8 * n), dtype="<f8").reshape(shape).astype(np.float64))
    if r.pos != len(data):
        raise FormatError("trailing bytes after tensor section")

    pending: list = []
    try:
        module = _decode(header["module"], [], pending)
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"malformed module record: {exc}") from exc
    bound: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for m, params in pending:
        for name, k in params.items():
            if k in bound:
                m.params[name], m.grads[name] = bound[k]
                continue
            target = m.params[name]
            if target.shape != tensors[k].shape:
                raise FormatError(
                    f"{type(m).__name__}.{name}: stored shape {tensors[k].shape} != {target.shape}"
                )
            target[...] = tensors[k]
            bound[k] = (target, m.grads[name])
    return module, header["meta"]


def loads(data: bytes) -> Module:
    return loads_with_meta(data)[0]


def save(module: Module, path, meta: dict | None = None) -> None:
    Path(path).write_bytes(dumps(module, meta))


def load(path) -> Module:
    return loads(Path(path).read_bytes())


def load_with_meta(path) -> tuple[Module, dict]:
    return loads_with_meta(Path(path).read_bytes())
