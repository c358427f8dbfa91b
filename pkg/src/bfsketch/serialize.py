"""Binary save/load of filters.

Layout (all integers little-endian)::

    magic    4 bytes  b"BFSK"
    version  u8       1
    tag      u8       variant tag
    meta     u32 length + UTF-8 JSON {"params", "seed", "state"} with sorted keys
    narrays  u32
    array*   u32 count, u8 width, packed data

Array data packs ``count`` unsigned ``width``-bit values LSB first and is
zero-padded to whole 64-bit words.  A compacted filter stores a single
array of width 0 whose data is its own wire form (header plus indices, no
padding).
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from .api import MembershipFilter, Variant
from .bitarrays import pack_uint, packed_size, unpack_uint
from .errors import FormatError, ParameterError

MAGIC = b"BFSK"
VERSION = 1
_PREFIX = struct.Struct("<4sBB")
_U32 = struct.Struct("<I")
_ARRAY = struct.Struct("<IB")


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, (tuple, set, frozenset)):
        return sorted(value) if isinstance(value, (set, frozenset)) else list(value)
    raise TypeError(f"cannot encode {type(value).__name__}")


def dumps(filt: MembershipFilter) -> bytes:
    from .space import CompactedBF

    if not filt.serializable:
        raise ParameterError(f"{type(filt).__name__} instance cannot be serialized")
    meta = {"params": filt.params(), "seed": int(filt.seed), "state": filt._extra_state()}
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":"), default=_json_default).encode()
    out = [_PREFIX.pack(MAGIC, VERSION, int(filt.variant)), _U32.pack(len(blob)), blob]
    if isinstance(filt, CompactedBF):
        wire = filt.to_bytes()
        out += [_U32.pack(1), _ARRAY.pack(len(wire), 0), wire]
        return b"".join(out)
    arrays = filt._arrays()
    out.append(_U32.pack(len(arrays)))
    for values, width in arrays:
        values = np.asarray(values).ravel()
        out.append(_ARRAY.pack(values.size, width))
        out.append(pack_uint(values, width))
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int, what: str) -> bytes:
        if self.pos + size > len(self.data):
            raise FormatError(f"truncated {what}: need {size} bytes", self.pos)
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def unpack(self, st: struct.Struct, what: str):
        return st.unpack(self.take(st.size, what))


def loads(data: bytes) -> MembershipFilter:
    from .registry import BY_TAG
    from .space import CompactedBF

    r = _Reader(bytes(data))
    magic, version, tag = r.unpack(_PREFIX, "header")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}", 4)
    try:
        cls = BY_TAG[Variant(tag)]
    except ValueError:
        raise FormatError(f"unknown variant tag {tag}", 5) from None
    (length,) = r.unpack(_U32, "metadata length")
    meta_at = r.pos
    try:
        meta = json.loads(r.take(length, "metadata").decode())
        params, seed, state = meta["params"], int(meta["seed"]), meta["state"]
    except (ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed metadata: {exc}", meta_at) from None
    (narrays,) = r.unpack(_U32, "array count")
    arrays = []
    raw = None
    for _ in range(narrays):
        at = r.pos
        count, width = r.unpack(_ARRAY, "array header")
        if width == 0:
            raw = r.take(count, "raw payload")
            continue
        if width > 64:
            raise FormatError(f"array width {width} exceeds 64", at)
        chunk = r.take(packed_size(count, width), "array data")
        arrays.append(unpack_uint(chunk, count, width))
    if r.pos != len(r.data):
        raise FormatError("trailing bytes after last array", r.pos)
    try:
        if cls is CompactedBF:
            if raw is None:
                raise FormatError("compacted payload missing", r.pos)
            filt = CompactedBF.from_bytes(raw, params["k"], seed)
            filt.n = int(state.get("n", 0))
            return filt
        return cls._from_state(params, seed, state, arrays)
    except FormatError:
        raise
    except (ParameterError, TypeError, ValueError, IndexError, KeyError) as exc:
        raise FormatError(f"inconsistent filter state: {exc}", meta_at) from None


def save(filt: MembershipFilter, path: str | os.PathLike) -> int:
    """Write ``filt`` to ``path``; returns the number of bytes written."""
    data = dumps(filt)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def load(path: str | os.PathLike) -> MembershipFilter:
    with open(path, "rb") as fh:
        return loads(fh.read())
