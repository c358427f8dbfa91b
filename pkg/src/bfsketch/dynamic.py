"""Growing, weighted, invertible and auxiliary-value filters."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .api import (ABSENT, Capabilities, QueryOutcome, Removal, ResultKind, Variant,
                  outcome)
from .bitarrays import BitVector, CounterVector
from .classic import CountingBF, HashedFilter, _check_mk
from .errors import InputError, ParameterError
from .hashing import MASK64, HashFamily, canonical, hash_digits, offset_of


class DynamicBF(HashedFilter):
    """A list of counting sub-filters, each holding at most ``capacity`` items.

    Inserts go to the last (active) sub-filter; a fresh one is appended once it
    is full.  Deletion is refused when more than one sub-filter could hold the
    item.  All sub-filters share one hash family.
    """

    variant = Variant.DYNAMIC
    capabilities = Capabilities(counting=True, deletion=True, false_negatives_possible=False)
    formula = "DBF_Eq24"

    def __init__(self, m: int, k: int, capacity: int, seed: int = 0, width: int = 4, hashes=None):
        _check_mk(m, k)
        if capacity < 1:
            raise ParameterError("capacity must be >= 1")
        self.m, self.k, self.capacity, self.width = m, k, capacity, width
        self.seed = seed
        self.family = hashes if hashes is not None else HashFamily(k, m, seed)
        self.subs: list[CountingBF] = [self._new_sub()]

    def _new_sub(self) -> CountingBF:
        return CountingBF(self.m, self.k, self.seed, self.width, hashes=self.family)

    @property
    def n(self) -> int:
        return sum(s.n for s in self.subs)

    @property
    def active(self) -> CountingBF:
        return self.subs[-1]

    def insert(self, item) -> None:
        if self.active.n >= self.capacity:
            self.subs.append(self._new_sub())
        self.active.insert(item)

    def holders(self, item) -> list[int]:
        pos = self.family.indices(item)
        return [i for i, s in enumerate(self.subs) if s.counters.counts[pos].min() > 0]

    def query(self, item) -> QueryOutcome:
        pos = self.family.indices(item)
        return outcome(any(s.counters.counts[pos].min() > 0 for s in self.subs))

    def query_many(self, items) -> list[bool]:
        idx = self.family.indices_many(list(items))
        if idx.shape[0] == 0:
            return []
        hit = np.zeros(idx.shape[0], dtype=bool)
        for s in self.subs:
            hit |= s.counters.counts[idx].min(axis=1) > 0
        return hit.tolist()

    def count_estimate(self, item) -> int:
        return sum(s.count_estimate(item) for s in self.subs)

    def remove(self, item) -> Removal:
        found = self.holders(item)
        if not found:
            return Removal.NOT_FOUND
        if len(found) > 1:
            return Removal.ABORTED
        return self.subs[found[0]].remove(item)

    def merge(self) -> int:
        """Union pairs of sub-filters whose combined load fits one capacity; returns merges done."""
        merges = 0
        while len(self.subs) > 1:
            pair = None
            for i in range(len(self.subs)):
                for j in range(i + 1, len(self.subs)):
                    if self.subs[i].n + self.subs[j].n <= self.capacity:
                        pair = (i, j)
                        break
                if pair:
                    break
            if pair is None:
                break
            i, j = pair
            a, b = self.subs[i], self.subs[j]
            total = a.counters.counts.astype(np.int64) + b.counters.counts.astype(np.int64)
            merged = self._new_sub()
            merged.counters = CounterVector(self.m, self.width,
                                            np.minimum(total, merged.counters.max_value))
            merged.n = a.n + b.n
            self.subs[i] = merged
            del self.subs[j]
            merges += 1
        return merges

    @property
    def size_bits(self) -> int:
        return len(self.subs) * self.m * self.width

    def params(self):
        return {"m": self.m, "k": self.k, "capacity": self.capacity, "width": self.width}

    def formula_params(self):
        return {"m": self.m, "k": self.k, "C": self.capacity, "N": self.n}

    def _arrays(self):
        return [(s.counters.counts, self.width) for s in self.subs]

    def _restore_arrays(self, arrays):
        self.subs = []
        for a in arrays:
            sub = self._new_sub()
            sub.counters = CounterVector(self.m, self.width, a)
            self.subs.append(sub)

    def _extra_state(self):
        return {"sub_n": [s.n for s in self.subs]}

    def _restore_extra(self, state):
        for sub, n in zip(self.subs, state.get("sub_n", [])):
            sub.n = int(n)


def normalized_query_weights(profile: Sequence[tuple[float, float]]) -> list[float]:
    """``r_e``: query frequency times non-membership likelihood, normalized to sum 1."""
    raw = [(1.0 - x) * f for f, x in profile]
    total = sum(raw)
    if total <= 0:
        raise ParameterError("profile has no non-member query mass")
    return [r / total for r in raw]


def wbf_allocate(profile: Sequence[tuple[float, float]], k_max: int, m: int, n: int,
                 k_avg: int | None = None) -> list[int]:
    """Greedy per-element hash counts minimizing the weighted false-positive sum.

    ``profile[e] = (query frequency, membership likelihood)``.  Every element
    starts at one hash; the remaining budget of ``len(profile) * (k_avg - 1)``
    hashes is handed out one at a time to the element whose term drops most,
    ties going to the earlier element.
    """
    if not profile:
        raise ParameterError("empty profile")
    if any(f < 0 for f, _ in profile):
        raise ParameterError("query frequencies must be non-negative")
    if k_max < 1 or m < 1 or n < 1:
        raise ParameterError("k_max, m and n must be positive")
    if k_avg is None:
        k_avg = max(1, round(math.log(2) * m / n))
    k_avg = min(k_avg, k_max)
    r = normalized_query_weights(profile)
    p = math.exp(-n * k_avg / m)
    keep = 1.0 - p
    k = [1] * len(profile)
    budget = len(profile) * (k_avg - 1)
    for _ in range(budget):
        best, gain = -1, -1.0
        for e, re in enumerate(r):
            if k[e] >= k_max:
                continue
            g = re * keep ** k[e] * p
            if g > gain:
                best, gain = e, g
        if best < 0:
            break
        k[best] += 1
    return k


def wbf_objective(profile: Sequence[tuple[float, float]], k: Sequence[int], p: float) -> float:
    from .formulas import weighted

    return weighted(normalized_query_weights(profile), k, p=p)


class WeightedBF(HashedFilter):
    """Bit array where each element uses its own number of hash functions.

    ``allocation`` maps items to ``k_e`` (for example from :func:`wbf_allocate`);
    other items use ``default_k``.  Element ``e`` uses the first ``k_e``
    functions of a ``k_max`` family, so a constant allocation is bit-for-bit a
    standard filter.
    """

    variant = Variant.WEIGHTED
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=False)
    formula = "WBF_Eq25"

    def __init__(self, m: int, default_k: int, k_max: int | None = None, seed: int = 0,
                 allocation: Mapping | None = None):
        k_max = k_max if k_max is not None else default_k
        _check_mk(m, default_k)
        if default_k > k_max:
            raise ParameterError("default_k exceeds k_max")
        self.m, self.default_k, self.k_max = m, default_k, k_max
        self.seed = seed
        self.family = HashFamily(k_max, m, seed)
        self.allocation: dict[bytes, int] = {}
        for item, ke in (allocation or {}).items():
            if not 1 <= ke <= k_max:
                raise ParameterError(f"k_e={ke} outside [1, {k_max}]")
            self.allocation[canonical(item)] = int(ke)
        self.bits = BitVector(m)
        self.hash_total = 0
        self.n = 0

    def k_of(self, item) -> int:
        return self.allocation.get(canonical(item), self.default_k)

    def positions(self, item) -> list[int]:
        return self.family.indices(item)[: self.k_of(item)]

    def insert(self, item) -> None:
        self.bits.bits[self.positions(item)] = 1
        self.hash_total += self.k_of(item)
        self.n += 1

    def query(self, item) -> QueryOutcome:
        return outcome(bool(self.bits.bits[self.positions(item)].all()))

    def zero_probability(self) -> float:
        return math.exp(-self.hash_total / self.m)

    @property
    def size_bits(self) -> int:
        return self.m

    def params(self):
        return {"m": self.m, "default_k": self.default_k, "k_max": self.k_max,
                "allocation": {b.hex(): k for b, k in sorted(self.allocation.items())}}

    def formula_params(self):
        return {"r": [1.0], "k": [self.default_k], "p": self.zero_probability()}

    def _arrays(self):
        return [(self.bits.bits, 1)]

    def _restore_arrays(self, arrays):
        self.bits = BitVector(self.m, arrays[0])

    def _extra_state(self):
        return {"n": self.n, "hash_total": self.hash_total}

    def _restore_extra(self, state):
        self.n = int(state.get("n", 0))
        self.hash_total = int(state.get("hash_total", 0))

    @classmethod
    def _from_state(cls, params, seed, state, arrays):
        params = dict(params)
        params["allocation"] = {bytes.fromhex(h): k for h, k in params.get("allocation", {}).items()}
        obj = cls(**params, seed=seed)
        obj._restore_arrays(arrays)
        obj._restore_extra(state)
        return obj


def _as_key(key) -> int:
    if isinstance(key, bool) or not isinstance(key, (int, np.integer)):
        raise InputError("IBLT keys must be integers in [0, 2**64)")
    key = int(key)
    if not 0 <= key <= MASK64:
        raise InputError("IBLT keys must be integers in [0, 2**64)")
    return key


class IBLT(HashedFilter):
    """Invertible Bloom lookup table over 64-bit integer keys and values.

    ``m`` cells are split into ``k`` subtables; function ``i`` addresses
    subtable ``i`` only, so an item's cells are distinct.  Each cell keeps a
    count and wrapping 64-bit key and value sums.

    Cell offsets are independent digits of one digest.  Double hashing modulo
    a subtable of a few hundred cells leaves so few distinct cell patterns
    that two keys of a thousand often share all their cells, and such a pair
    can never be peeled.
    """

    variant = Variant.IBLT
    capabilities = Capabilities(counting=True, deletion=True, false_negatives_possible=False,
                                result_kind=ResultKind.BOOLEAN_FREQUENCY, fn_qualified=True)

    def __init__(self, m: int, k: int, seed: int = 0):
        _check_mk(m, k)
        if m // k < 1:
            raise ParameterError("need at least one cell per subtable")
        self.m_requested = m
        self.k = k
        self.sub = m // k
        self.m = self.sub * k
        if self.sub < 2:
            raise ParameterError("subtables need at least 2 cells")
        if k * math.log2(self.sub) > 448:
            raise ParameterError("k * log2(m / k) must not exceed 448 bits")
        self.seed = seed
        self.family = None
        self.count = np.zeros(self.m, dtype=np.int64)
        self.key_sum = np.zeros(self.m, dtype=np.uint64)
        self.value_sum = np.zeros(self.m, dtype=np.uint64)
        self.n = 0

    def cells(self, key) -> list[int]:
        offsets = hash_digits(_as_key(key), self.k, self.sub, self.seed, b"iblt")
        return [i * self.sub + h for i, h in enumerate(offsets)]

    def _apply(self, key: int, value: int, sign: int) -> None:
        for c in self.cells(key):
            self.count[c] += sign
            self.key_sum[c] = (int(self.key_sum[c]) + sign * key) & MASK64
            self.value_sum[c] = (int(self.value_sum[c]) + sign * value) & MASK64

    def insert(self, key, value: int = 0) -> None:
        self._apply(_as_key(key), int(value) & MASK64, 1)
        self.n += 1

    def remove(self, key, value: int = 0) -> Removal:
        self._apply(_as_key(key), int(value) & MASK64, -1)
        self.n -= 1
        return Removal.REMOVED

    def get(self, key):
        """Value stored for ``key``; None when absent or not determinable."""
        key = _as_key(key)
        for c in self.cells(key):
            if self.count[c] == 0:
                return None
            if self.count[c] == 1:
                return int(self.value_sum[c]) if int(self.key_sum[c]) == key else None
        return None

    def query(self, key) -> QueryOutcome:
        key = _as_key(key)
        cells = self.cells(key)
        counts = [int(self.count[c]) for c in cells]
        if min(counts) <= 0:
            return ABSENT
        for c, cnt in zip(cells, counts):
            if cnt == 1 and int(self.key_sum[c]) != key:
                return ABSENT
        return outcome(True, frequency=min(counts))

    def count_estimate(self, key) -> int:
        q = self.query(key)
        return q.frequency if q.present else 0

    def is_empty(self) -> bool:
        return not (self.count.any() or self.key_sum.any() or self.value_sum.any())

    def copy(self) -> "IBLT":
        out = IBLT(self.m_requested, self.k, self.seed)
        out.count = self.count.copy()
        out.key_sum = self.key_sum.copy()
        out.value_sum = self.value_sum.copy()
        out.n = self.n
        return out

    def list_entries(self) -> tuple[list[tuple[int, int]], bool]:
        """Peel a copy of the table; returns ``(pairs, residue)``.

        ``residue`` is True when some cells could not be emptied, meaning the
        list is partial.
        """
        t = self.copy()
        pairs = []
        pending = [int(c) for c in np.flatnonzero(t.count == 1)]
        while pending:
            c = pending.pop()
            if t.count[c] != 1:
                continue
            key, value = int(t.key_sum[c]), int(t.value_sum[c])
            pairs.append((key, value))
            touched = t.cells(key)
            t._apply(key, value, -1)
            pending.extend(x for x in touched if t.count[x] == 1)
        return pairs, not t.is_empty()

    @property
    def size_bits(self) -> int:
        return self.m * (64 * 3)

    def params(self):
        return {"m": self.m_requested, "k": self.k}

    def formula_params(self):
        return {"m": self.m, "k": self.k, "n": self.n}

    def _arrays(self):
        return [(self.count.astype(np.uint64), 64), (self.key_sum, 64), (self.value_sum, 64)]

    def _restore_arrays(self, arrays):
        self.count = np.asarray(arrays[0], dtype=np.uint64).astype(np.int64)
        self.key_sum = np.asarray(arrays[1], dtype=np.uint64).copy()
        self.value_sum = np.asarray(arrays[2], dtype=np.uint64).copy()


class ShiftingBF(HashedFilter):
    """Shifting Bloom filter with ``k/2`` base positions and ``k/2`` shifted positions.

    ``membership`` mode shifts by a hashed offset ``o(x)`` in ``[1, w_bar - 1]``.
    ``association`` mode shifts by a caller-supplied value in the same range;
    multiplicity can be stored as ``min(count, w_bar - 1)``.  The array has
    ``m + w_bar - 1`` bits so shifted positions never wrap.
    """

    variant = Variant.SHIFTING
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=False)
    formula = "ShBF_Eq23"
    MODES = ("membership", "association")

    def __init__(self, m: int, k: int, w_bar: int = 64, seed: int = 0, mode: str = "membership"):
        if k < 2 or k % 2:
            raise ParameterError("k must be an even number >= 2")
        _check_mk(m, k // 2)
        if w_bar < 2:
            raise ParameterError("w_bar must be >= 2")
        if mode not in self.MODES:
            raise ParameterError(f"mode must be one of {self.MODES}")
        self.m, self.k, self.w_bar, self.mode = m, k, w_bar, mode
        self.seed = seed
        self.family = HashFamily(k // 2, m, seed)
        self.bits = BitVector(m + w_bar - 1)
        self.n = 0

    def _shift(self, item, aux):
        if self.mode == "membership":
            return offset_of(item, self.w_bar, self.seed)
        if aux is None or not 1 <= int(aux) <= self.w_bar - 1:
            raise InputError(f"auxiliary value must be in [1, {self.w_bar - 1}]")
        return int(aux)

    def insert(self, item, aux: int | None = None) -> None:
        base = np.array(self.family.indices(item))
        o = self._shift(item, aux)
        self.bits.bits[base] = 1
        self.bits.bits[base + o] = 1
        self.n += 1

    def query_aux(self, item) -> tuple[bool, set[int]]:
        bits = self.bits.bits
        base = np.array(self.family.indices(item))
        exists = bool(bits[base].all())
        if not exists:
            return False, set()
        return True, {a for a in range(1, self.w_bar) if bits[base + a].all()}

    def query(self, item) -> QueryOutcome:
        bits = self.bits.bits
        base = np.array(self.family.indices(item))
        if not bits[base].all():
            return ABSENT
        if self.mode == "membership":
            return outcome(bool(bits[base + offset_of(item, self.w_bar, self.seed)].all()))
        return outcome(True, auxiliary=frozenset(self.query_aux(item)[1]))

    def query_many(self, items) -> list[bool]:
        if self.mode != "membership":
            return super().query_many(items)
        items = list(items)
        if not items:
            return []
        base = self.family.indices_many(items)
        offs = np.array([offset_of(x, self.w_bar, self.seed) for x in items], dtype=np.int64)
        bits = self.bits.bits
        return (bits[base].all(axis=1) & bits[base + offs[:, None]].all(axis=1)).tolist()

    @property
    def size_bits(self) -> int:
        return self.m + self.w_bar - 1

    def params(self):
        return {"m": self.m, "k": self.k, "w_bar": self.w_bar, "mode": self.mode}

    def formula_params(self):
        return {"m": self.m, "k": self.k, "n": self.n, "w_bar": self.w_bar}

    def _arrays(self):
        return [(self.bits.bits, 1)]

    def _restore_arrays(self, arrays):
        self.bits = BitVector(self.m + self.w_bar - 1, arrays[0])
