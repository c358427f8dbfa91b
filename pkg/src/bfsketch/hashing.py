"""Seeded, deterministic hashing primitives.

Every filter derives its positions from one keyed 128-bit BLAKE2b digest of the
item.  The digest is split into two 64-bit halves ``h_a`` and ``h_b`` and the
``i``-th index is obtained by double hashing::

    g_i(x) = ((h_a + i * h_b) mod 2**64) mod m_i

``h_b`` is forced odd so that, for power-of-two moduli, the ``k`` indices of an
item are distinct.  Independent hash groups inside one filter (set/reset
functions, block selectors, fingerprints, ...) are separated with the BLAKE2b
``person`` field rather than with different seeds, so a single 64-bit seed
fully determines a filter.
"""

from __future__ import annotations

import hashlib
import math
import struct
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError, ParameterError

MASK64 = (1 << 64) - 1
EMPTY_FINGERPRINT = 0

Item = bytes | str | int


def canonical(item: Item) -> bytes:
    """Return the byte string that is actually hashed for ``item``.

    ``str`` is UTF-8 encoded and non-negative ``int`` values below 2**64 are
    encoded as 8 little-endian bytes.
    """
    if isinstance(item, bytes):
        return item
    if isinstance(item, str):
        return item.encode("utf-8")
    if isinstance(item, (bytearray, memoryview)):
        return bytes(item)
    if isinstance(item, (int, np.integer)) and not isinstance(item, bool):
        value = int(item)
        if 0 <= value <= MASK64:
            return value.to_bytes(8, "little")
        raise InputError(f"integer item {value} outside [0, 2**64)")
    raise InputError(f"cannot hash item of type {type(item).__name__}")


def _key(seed: int) -> bytes:
    return (int(seed) & MASK64).to_bytes(8, "little")


def _person(domain: bytes | str) -> bytes:
    if isinstance(domain, str):
        domain = domain.encode("ascii")
    if len(domain) > 16:
        raise ParameterError("hash domain tag longer than 16 bytes")
    return domain


def hash_pair(item: Item, seed: int = 0, domain: bytes | str = b"") -> tuple[int, int]:
    """Two 64-bit hashes of ``item`` from one keyed digest."""
    digest = hashlib.blake2b(
        canonical(item), digest_size=16, key=_key(seed), person=_person(domain)
    ).digest()
    return int.from_bytes(digest[:8], "little"), int.from_bytes(digest[8:], "little")


def hash64(item: Item, seed: int = 0, domain: bytes | str = b"") -> int:
    """A single 64-bit keyed hash of ``item``."""
    digest = hashlib.blake2b(
        canonical(item), digest_size=8, key=_key(seed), person=_person(domain)
    ).digest()
    return int.from_bytes(digest, "little")


def hash_digits(item: Item, count: int, radix: int, seed: int = 0,
                domain: bytes | str = b"") -> list[int]:
    """``count`` independent values in ``[0, radix)`` read as base-``radix`` digits of one digest.

    Unlike double hashing, the values do not follow an arithmetic progression,
    which matters when ``radix`` is small.
    """
    if count < 1 or radix < 2:
        raise ParameterError("need count >= 1 and radix >= 2")
    need = count * math.log2(radix) + 64
    if need > 512:
        raise ParameterError("too many digits for one 512-bit digest")
    size = max(16, math.ceil(need / 8))
    h = int.from_bytes(hashlib.blake2b(canonical(item), digest_size=size, key=_key(seed),
                                       person=_person(domain)).digest(), "little")
    out = []
    for _ in range(count):
        h, d = divmod(h, radix)
        out.append(d)
    return out


class HashFamily:
    """``k`` seeded index functions built by double hashing.

    ``m`` is either one modulus shared by all functions or a sequence of ``k``
    per-function moduli (partitioned filters).
    """

    scripted = False

    def __init__(self, k: int, m: int | Sequence[int], seed: int = 0, domain: bytes | str = b"index"):
        if k < 1:
            raise ParameterError(f"k must be >= 1, got {k}")
        if isinstance(m, (int, np.integer)):
            moduli = [int(m)] * k
        else:
            moduli = [int(x) for x in m]
            if len(moduli) != k:
                raise ParameterError(f"expected {k} moduli, got {len(moduli)}")
        if min(moduli) < 2:
            raise ParameterError(f"modulus must be >= 2, got {min(moduli)}")
        self.k = k
        self.moduli = moduli
        self.m = moduli[0] if len(set(moduli)) == 1 else tuple(moduli)
        self.seed = int(seed) & MASK64
        self.domain = _person(domain)
        self._key = _key(self.seed)

    def __repr__(self):
        return f"HashFamily(k={self.k}, m={self.m!r}, seed={self.seed}, domain={self.domain!r})"

    def pair(self, item: Item) -> tuple[int, int]:
        digest = hashlib.blake2b(
            canonical(item), digest_size=16, key=self._key, person=self.domain
        ).digest()
        h_a = int.from_bytes(digest[:8], "little")
        h_b = int.from_bytes(digest[8:], "little") | 1
        return h_a, h_b

    def indices(self, item: Item) -> list[int]:
        h_a, h_b = self.pair(item)
        return [((h_a + i * h_b) & MASK64) % mod for i, mod in enumerate(self.moduli)]

    def indices_many(self, items: Iterable[Item]) -> np.ndarray:
        """Indices for many items at once, shape ``(len(items), k)``."""
        pairs = [self.pair(item) for item in items]
        if not pairs:
            return np.empty((0, self.k), dtype=np.int64)
        arr = np.array(pairs, dtype=np.uint64)
        steps = np.arange(self.k, dtype=np.uint64)
        with np.errstate(over="ignore"):
            raw = arr[:, :1] + steps[None, :] * arr[:, 1:2]
        moduli = np.array(self.moduli, dtype=np.uint64)
        return (raw % moduli[None, :]).astype(np.int64)


class ScriptedHashFamily:
    """Test stub returning caller-scripted index lists.

    Used to replay worked examples whose hash outputs are given explicitly.
    Items absent from ``script`` fall back to ``fallback`` when provided.
    """

    scripted = True

    def __init__(self, k: int, m: int | Sequence[int], script: Mapping[Item, Sequence[int]],
                 fallback: HashFamily | None = None):
        self.k = k
        self.m = m
        self.moduli = [int(m)] * k if isinstance(m, int) else [int(x) for x in m]
        self.seed = fallback.seed if fallback is not None else 0
        self.fallback = fallback
        self._script = {}
        for item, idx in script.items():
            idx = [int(i) for i in idx]
            if len(idx) != k:
                raise ParameterError(f"scripted item {item!r} has {len(idx)} indices, expected {k}")
            for i, mod in zip(idx, self.moduli):
                if not 0 <= i < mod:
                    raise ParameterError(f"scripted index {i} outside [0, {mod})")
            self._script[canonical(item)] = idx

    def indices(self, item: Item) -> list[int]:
        key = canonical(item)
        if key in self._script:
            return list(self._script[key])
        if self.fallback is None:
            raise InputError(f"item {item!r} is not scripted")
        return self.fallback.indices(item)

    def indices_many(self, items: Iterable[Item]) -> np.ndarray:
        rows = [self.indices(item) for item in items]
        return np.array(rows, dtype=np.int64).reshape(len(rows), self.k)


def hash_indices(item: Item, k: int, m: int, seed: int = 0) -> list[int]:
    """The ``k`` double-hashing indices of ``item`` in ``[0, m)``."""
    return HashFamily(k, m, seed).indices(item)


def fingerprint(item: Item, f: int, seed: int = 0) -> int:
    """An ``f``-bit fingerprint of ``item``; 0 is reserved for empty slots and never returned."""
    if not 1 <= f <= 32:
        raise ParameterError(f"fingerprint width must be in [1, 32], got {f}")
    value = hash64(item, seed, b"fingerprint") & ((1 << f) - 1)
    return value if value != EMPTY_FINGERPRINT else 1


def offset_of(item: Item, w_bar: int, seed: int = 0) -> int:
    """Shift offset in ``[1, w_bar - 1]``."""
    if w_bar < 2:
        raise ParameterError(f"w_bar must be >= 2, got {w_bar}")
    return 1 + hash64(item, seed, b"offset") % (w_bar - 1)


class VectorHasher:
    """Hash real vectors by quantizing each component into ``q`` symbols.

    Each component is bucketed uniformly over ``[lo, hi]`` (values outside the
    range clamp to the edge buckets); the symbol string is then hashed.  Two
    vectors that quantize identically hash identically.
    """

    def __init__(self, q: int, seed: int = 0, lo: float = 0.0, hi: float = 1.0):
        if q < 2:
            raise ParameterError(f"q must be >= 2, got {q}")
        if not hi > lo:
            raise ParameterError("quantization range must satisfy hi > lo")
        self.q = q
        self.seed = seed
        self.lo = float(lo)
        self.hi = float(hi)

    def symbols(self, v: Sequence[float]) -> tuple[int, ...]:
        arr = np.asarray(v, dtype=np.float64).ravel()
        if arr.size == 0:
            raise InputError("cannot hash an empty vector")
        if not np.all(np.isfinite(arr)):
            raise InputError("vector has NaN or infinite components")
        scaled = np.floor((arr - self.lo) / (self.hi - self.lo) * self.q)
        return tuple(int(s) for s in np.clip(scaled, 0, self.q - 1))

    def __call__(self, v: Sequence[float]) -> int:
        syms = self.symbols(v)
        payload = struct.pack(f"<{len(syms)}I", *syms)
        return hash64(payload, self.seed, b"vector")


def vector_hash(v: Sequence[float], q: int, seed: int = 0, lo: float = 0.0, hi: float = 1.0) -> int:
    return VectorHasher(q, seed, lo, hi)(v)


def is_power_of_two(x: int) -> bool:
    return x > 0 and x & (x - 1) == 0


def next_power_of_two(x: int) -> int:
    return 1 << max(0, math.ceil(math.log2(max(1, x))))
