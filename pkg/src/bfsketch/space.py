"""Memory-oriented variants: d-left counting filter, BFAH, Matrix BF, Compacted BF."""

from __future__ import annotations

import struct
from typing import Callable

import numpy as np

from .api import (ABSENT, Capabilities, MembershipFilter, QueryOutcome, Removal, ResultKind,
                  Variant, Verdict, outcome)
from .bitarrays import BitVector, pack_uint, packed_size, unpack_uint
from .classic import HashedFilter, StandardBF, _check_mk
from .errors import CapabilityError, FilterFullError, FormatError, InputError, ParameterError
from .hashing import HashFamily, canonical, hash64, is_power_of_two


class DlCBF(MembershipFilter):
    """d-left counting filter.

    An item's fingerprint ``f_x`` (``log2(buckets) + r`` bits) is passed
    through one invertible affine permutation per subtable; the permuted value
    splits into a bucket index and an ``r``-bit remainder.  A remainder already
    present in a candidate bucket has its counter incremented; otherwise it is
    stored in the least-loaded candidate bucket, ties going to the leftmost
    subtable.
    """

    variant = Variant.D_LEFT
    capabilities = Capabilities(counting=True, deletion=True, false_negatives_possible=False,
                                result_kind=ResultKind.BOOLEAN_FREQUENCY, fn_qualified=True)
    formula = "Cuckoo_Eq30"

    def __init__(self, d: int = 4, buckets: int = 512, w: int = 8, r: int = 12,
                 counter_bits: int = 2, seed: int = 0):
        if d < 1 or w < 1 or r < 1 or counter_bits < 1:
            raise ParameterError("d, w, r and counter_bits must be positive")
        if not is_power_of_two(buckets):
            raise ParameterError("buckets per subtable must be a power of two")
        self.d, self.buckets, self.w, self.r, self.counter_bits = d, buckets, w, r, counter_bits
        self.seed = seed
        self.z = buckets.bit_length() - 1 + r
        if self.z > 64:
            raise ParameterError("fingerprint wider than 64 bits")
        self._zmask = (1 << self.z) - 1
        self._rmask = (1 << r) - 1
        self.perms = [((hash64(i, seed, b"perm-a") | 1) & self._zmask,
                       hash64(i, seed, b"perm-c") & self._zmask) for i in range(d)]
        self.rem = np.zeros((d, buckets, w), dtype=np.int64)
        self.count = np.zeros((d, buckets, w), dtype=np.int64)
        self.counter_max = (1 << counter_bits) - 1
        self.n = 0
        self.saturation_events = 0

    def fingerprint(self, item) -> int:
        return hash64(item, self.seed, b"dlcbf") & self._zmask

    def candidates(self, item) -> list[tuple[int, int]]:
        """(bucket, remainder) in each subtable."""
        fx = self.fingerprint(item)
        out = []
        for a, c in self.perms:
            g = (a * fx + c) & self._zmask
            out.append((g >> self.r, g & self._rmask))
        return out

    def _find(self, cands):
        for t, (b, rem) in enumerate(cands):
            cells = np.flatnonzero((self.count[t, b] > 0) & (self.rem[t, b] == rem))
            if cells.size:
                return t, b, int(cells[0])
        return None

    def loads(self) -> np.ndarray:
        """Occupied cells per bucket, shape ``(d, buckets)``."""
        return (self.count > 0).sum(axis=2)

    def insert(self, item) -> None:
        cands = self.candidates(item)
        hit = self._find(cands)
        if hit is not None:
            t, b, c = hit
            if self.count[t, b, c] < self.counter_max:
                self.count[t, b, c] += 1
            else:
                self.saturation_events += 1
            self.n += 1
            return
        loads = [int((self.count[t, b] > 0).sum()) for t, (b, _) in enumerate(cands)]
        best = min(range(self.d), key=lambda t: (loads[t], t))
        if loads[best] >= self.w:
            raise FilterFullError("all candidate buckets are full",
                                  {"n": self.n, "load": self.load_factor(), "candidate_loads": loads})
        b, rem = cands[best]
        cell = int(np.flatnonzero(self.count[best, b] == 0)[0])
        self.rem[best, b, cell] = rem
        self.count[best, b, cell] = 1
        self.n += 1

    def query(self, item) -> QueryOutcome:
        hit = self._find(self.candidates(item))
        if hit is None:
            return ABSENT
        return outcome(True, frequency=int(self.count[hit]))

    def count_estimate(self, item) -> int:
        hit = self._find(self.candidates(item))
        return 0 if hit is None else int(self.count[hit])

    def remove(self, item) -> Removal:
        hit = self._find(self.candidates(item))
        if hit is None:
            return Removal.NOT_FOUND
        if self.count[hit] < self.counter_max:
            self.count[hit] -= 1
            if self.count[hit] == 0:
                self.rem[hit] = 0
        self.n -= 1
        return Removal.REMOVED

    def load_factor(self) -> float:
        return float((self.count > 0).sum()) / (self.d * self.buckets * self.w)

    @property
    def size_bits(self) -> int:
        return self.d * self.buckets * self.w * (self.r + self.counter_bits)

    def params(self):
        return {"d": self.d, "buckets": self.buckets, "w": self.w, "r": self.r,
                "counter_bits": self.counter_bits}

    def formula_params(self):
        return {"f": self.r, "b": self.w, "alpha": self.load_factor(), "candidates": self.d}

    serializable = True

    def _arrays(self):
        return [(self.rem.ravel(), self.r), (self.count.ravel(), self.counter_bits)]

    def _restore_arrays(self, arrays):
        shape = (self.d, self.buckets, self.w)
        self.rem = np.asarray(arrays[0], dtype=np.int64).reshape(shape).copy()
        self.count = np.asarray(arrays[1], dtype=np.int64).reshape(shape).copy()

    def _extra_state(self):
        return {"n": self.n, "saturation_events": self.saturation_events}

    def _restore_extra(self, state):
        self.n = int(state.get("n", 0))
        self.saturation_events = int(state.get("saturation_events", 0))


class BFAH(HashedFilter):
    """Bloom filter whose items are also stored at one of their ``k`` bit addresses.

    A selector hash (range ``[0, k)``) picks which of the item's positions
    holds its slot.  A query whose bits are all set but whose slot does not
    contain the item is a detected false positive and answers absent.
    """

    variant = Variant.BFAH
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=False)
    serializable = False

    def __init__(self, m: int, k: int, seed: int = 0, hashes=None, selector=None):
        _check_mk(m, k)
        self.m, self.k = m, k
        self.seed = seed
        self.family = hashes if hashes is not None else HashFamily(k, m, seed)
        if selector is None:
            selector = HashFamily(1, k, seed, b"select") if k > 1 else None
        self.selector = selector
        self.bits = BitVector(m)
        self.slots: dict[int, list[bytes]] = {}
        self.n = 0
        self.collisions = 0
        self.detected_false_positives = 0

    def address(self, item) -> int:
        pos = self.family.indices(item)
        choice = self.selector.indices(item)[0] if self.selector is not None else 0
        return pos[choice]

    def insert(self, item) -> None:
        key = canonical(item)
        self.bits.bits[self.family.indices(item)] = 1
        addr = self.address(item)
        slot = self.slots.setdefault(addr, [])
        if key in slot:
            return
        if slot:
            self.collisions += 1
        slot.append(key)
        self.n += 1

    def collides(self, item) -> bool:
        """True when another stored item shares this item's slot."""
        key = canonical(item)
        return any(other != key for other in self.slots.get(self.address(item), []))

    def query(self, item) -> QueryOutcome:
        if not self.bits.bits[self.family.indices(item)].all():
            return ABSENT
        addr = self.address(item)
        if canonical(item) in self.slots.get(addr, []):
            return QueryOutcome(Verdict.PRESENT, auxiliary=addr)
        self.detected_false_positives += 1
        return ABSENT

    def bit_test(self, item) -> bool:
        """The plain Bloom-filter answer, before the slot check."""
        return bool(self.bits.bits[self.family.indices(item)].all())

    @property
    def size_bits(self) -> int:
        return self.m

    def params(self):
        return {"m": self.m, "k": self.k}

    def formula_params(self):
        return {"m": self.m, "k": self.k, "n": self.n}


def shingles(text: str, size: int = 5) -> list[str]:
    """Overlapping runs of ``size`` words (stride 1); short texts form one chunk."""
    words = text.split()
    if not words:
        return []
    if len(words) <= size:
        return [" ".join(words)]
    return [" ".join(words[i:i + size]) for i in range(len(words) - size + 1)]


def lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


class MatrixBF(MembershipFilter):
    """One standard filter row per document, all rows sharing a seed.

    Similarity of two documents is the popcount of the AND of their rows.
    """

    variant = Variant.MATRIX
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=False)
    serializable = False
    DEFAULT_DOC = "_default"

    def __init__(self, m: int, k: int, seed: int = 0, chunker: str | Callable = "shingle",
                 shingle_size: int = 5, threshold: int = 0, hashes=None):
        _check_mk(m, k)
        self.m, self.k, self.seed, self.threshold = m, k, seed, threshold
        self.shingle_size = shingle_size
        if chunker == "shingle":
            self.chunker = lambda text: shingles(text, shingle_size)
        elif chunker == "line":
            self.chunker = lines
        elif callable(chunker):
            self.chunker = chunker
        else:
            raise ParameterError(f"unknown chunker {chunker!r}")
        self.family = hashes if hashes is not None else HashFamily(k, m, seed)
        self.rows: dict = {}
        self.n = 0

    def _row(self, doc_id) -> StandardBF:
        if doc_id not in self.rows:
            self.rows[doc_id] = StandardBF(self.m, self.k, self.seed, hashes=self.family)
        return self.rows[doc_id]

    def add_document(self, doc_id, text: str) -> int:
        chunks = self.chunker(text)
        row = self._row(doc_id)
        for c in chunks:
            row.insert(c)
        self.n += len(chunks)
        return len(chunks)

    def insert(self, item, doc_id=None) -> None:
        self._row(self.DEFAULT_DOC if doc_id is None else doc_id).insert(item)
        self.n += 1

    def query(self, item, doc_id=None) -> QueryOutcome:
        if doc_id is not None:
            if doc_id not in self.rows:
                raise InputError(f"unknown document {doc_id!r}")
            return self.rows[doc_id].query(item)
        return outcome(any(row.query(item).present for row in self.rows.values()))

    def similarity(self, i, j) -> tuple[int, float, bool]:
        for doc in (i, j):
            if doc not in self.rows:
                raise InputError(f"unknown document {doc!r}")
        a, b = self.rows[i].bits.bits, self.rows[j].bits.bits
        both = int(np.count_nonzero(a & b))
        ratio = both / max(1, int(np.count_nonzero(a)))
        return both, ratio, both > self.threshold

    @property
    def size_bits(self) -> int:
        return self.m * max(1, len(self.rows))

    def params(self):
        return {"m": self.m, "k": self.k, "threshold": self.threshold}

    def formula_params(self):
        n_row = max((row.n for row in self.rows.values()), default=0)
        return {"m": self.m, "k": self.k, "n": n_row}


HEADER = struct.Struct("<BHI")


def _check_geometry(nb: int, w: int) -> None:
    if w < 2 or w > 16:
        raise ParameterError(f"index width must be in [2, 16], got {w}")
    if nb < 2:
        raise ParameterError("need at least 2 blocks")
    if nb > (1 << w) - 2:
        raise ParameterError(f"{nb} blocks do not fit {w}-bit indices (max {(1 << w) - 2})")
    if w >= nb:
        raise ParameterError("index width must be smaller than the block count to save space")


def _pattern_values(bits: np.ndarray, nb: int, bp: int) -> np.ndarray:
    blocks = bits.reshape(nb, bp).astype(np.int64)
    weights = (np.int64(1) << np.arange(nb, dtype=np.int64))[:, None]
    return (blocks * weights).sum(axis=0)


class CompactedBF(MembershipFilter):
    """A standard filter folded into ``bp`` indices of ``w`` bits.

    The source filter of ``m = nb * bp`` bits is cut into ``nb`` blocks; index
    ``i`` summarizes the pattern formed by bit ``i`` of every block.  Codes:
    ``0`` no ones, ``1..nb`` a single one in that block, ``2**w - 1`` every bit
    treated as one, and values strictly between ``nb`` and ``2**w - 1`` hold
    the pattern itself.  Queries read the codes directly.
    """

    variant = Variant.COMPACTED
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=True)

    def __init__(self, codes, w: int, nb: int, k: int, seed: int = 0, n: int = 0):
        _check_geometry(nb, w)
        self.codes = np.asarray(codes, dtype=np.int64).copy()
        self.w, self.nb, self.k, self.seed = w, nb, k, seed
        self.bp = len(self.codes)
        self.m = self.nb * self.bp
        self.many = (1 << w) - 1
        self.n = n
        if self.codes.size and (self.codes.min() < 0 or self.codes.max() > self.many):
            raise FormatError("index value out of range", HEADER.size)
        self.family = HashFamily(k, self.m, seed)

    serializable = True

    def insert(self, item) -> None:
        raise CapabilityError(self.variant.name, "insertion")

    def bit(self, position: int) -> int:
        block, i = divmod(position, self.bp)
        code = int(self.codes[i])
        if code == 0:
            return 0
        if code == self.many:
            return 1
        if code <= self.nb:
            return int(code == block + 1)
        return (code >> block) & 1

    def query(self, item) -> QueryOutcome:
        return outcome(all(self.bit(p) for p in self.family.indices(item)))

    def expanded_bits(self) -> np.ndarray:
        """The reconstructed bit array of length ``m``."""
        codes = self.codes
        blocks = np.arange(self.nb)[:, None]
        single = (codes[None, :] >= 1) & (codes[None, :] <= self.nb) & (codes[None, :] == blocks + 1)
        verbatim = (codes[None, :] > self.nb) & (codes[None, :] < self.many) & (((codes[None, :] >> blocks) & 1) == 1)
        many = np.broadcast_to(codes[None, :] == self.many, (self.nb, self.bp))
        return (single | verbatim | many).astype(np.uint8).reshape(-1)

    @property
    def size_bits(self) -> int:
        return self.bp * self.w

    def params(self):
        return {"w": self.w, "nb": self.nb, "k": self.k}

    def formula_params(self):
        return {"m": self.m, "k": self.k, "n": self.n}

    def to_bytes(self) -> bytes:
        """Wire form: little-endian header (w u8, nb u16, bp u32) then packed ``w``-bit indices."""
        return HEADER.pack(self.w, self.nb, self.bp) + pack_uint(self.codes, self.w, word_align=False)

    @classmethod
    def from_bytes(cls, data: bytes, k: int, seed: int = 0) -> "CompactedBF":
        if len(data) < HEADER.size:
            raise FormatError("truncated header", len(data))
        w, nb, bp = HEADER.unpack_from(data)
        try:
            _check_geometry(nb, w)
        except ParameterError as exc:
            raise FormatError(str(exc), 0) from None
        need = HEADER.size + packed_size(bp, w, word_align=False)
        if len(data) < need:
            raise FormatError(f"truncated index array, need {need} bytes", len(data))
        codes = unpack_uint(data[HEADER.size:need], bp, w).astype(np.int64)
        return cls(codes, w, nb, k, seed)

    def _arrays(self):
        return [(self.codes, self.w)]

    def _extra_state(self):
        return {"n": self.n}

    @classmethod
    def _from_state(cls, params, seed, state, arrays):
        return cls(arrays[0], params["w"], params["nb"], params["k"], seed, int(state.get("n", 0)))


def compact_codes(bits: np.ndarray, nb: int, w: int, seed: int = 0,
                  extra_rule: bool = True) -> np.ndarray:
    """Apply the four mapping rules (plus the optional verbatim rule) to a bit array."""
    _check_geometry(nb, w)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % nb:
        raise ParameterError(f"filter length {bits.size} is not divisible by {nb} blocks")
    bp = bits.size // nb
    blocks = bits.reshape(nb, bp)
    ones = blocks.sum(axis=0)
    values = _pattern_values(bits, nb, bp)
    many = (1 << w) - 1
    rng = np.random.default_rng(seed)
    codes = np.zeros(bp, dtype=np.int64)
    for i in range(bp):
        c = int(ones[i])
        if c == 0:
            continue
        if c == 1:
            codes[i] = int(np.flatnonzero(blocks[:, i])[0]) + 1
        elif extra_rule and nb < values[i] < many:
            codes[i] = values[i]
        elif 2 * c >= nb:
            codes[i] = many
        else:
            codes[i] = int(rng.choice(np.flatnonzero(blocks[:, i]))) + 1
    return codes


def compact(bf: StandardBF, nb: int, w: int, seed: int = 0, extra_rule: bool = True) -> CompactedBF:
    """Fold a standard filter into a :class:`CompactedBF`."""
    if getattr(bf.family, "scripted", False):
        raise ParameterError("cannot compact a filter built on scripted hashes")
    codes = compact_codes(bf.bits.bits, nb, w, seed, extra_rule)
    return CompactedBF(codes, w, nb, bf.k, bf.seed, bf.n)


def reconstruct(cbf: CompactedBF) -> StandardBF:
    """Expand the codes back into a standard filter with the original hash family."""
    out = StandardBF(cbf.m, cbf.k, cbf.seed)
    out.bits = BitVector(cbf.m, cbf.expanded_bits())
    out.n = cbf.n
    return out
