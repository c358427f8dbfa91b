"""Deletable, distance-sensitive, cuckoo, persistent (time-sliced) and high-dimensional filters."""

from __future__ import annotations

import math
import random

import numpy as np
from scipy import stats

from .api import ABSENT, Capabilities, MembershipFilter, QueryOutcome, Removal, ResultKind, Variant, outcome
from .bitarrays import BitVector, CounterVector
from .classic import HashedFilter, StandardBF, _check_mk
from .errors import FilterFullError, InputError, ParameterError
from .hashing import HashFamily, VectorHasher, fingerprint, hash64, is_power_of_two


class DeletableBF(HashedFilter):
    """Bit array split into ``r`` regions, each with a collision flag.

    A region is flagged the first time an insertion finds one of its bits
    already set.  Removal clears only the item's bits lying in unflagged
    regions, so other members never lose a bit.
    """

    variant = Variant.DELETABLE
    capabilities = Capabilities(counting=False, deletion=True, false_negatives_possible=False)

    def __init__(self, m: int, k: int, r: int, seed: int = 0, hashes=None):
        _check_mk(m, k)
        if not 1 <= r <= m:
            raise ParameterError("region count must be in [1, m]")
        self.m, self.k, self.r = m, k, r
        self.seed = seed
        self.family = hashes if hashes is not None else HashFamily(k, m, seed)
        self.bits = BitVector(m)
        self.collided = np.zeros(r, dtype=np.uint8)
        self.n = 0

    def region(self, pos: int) -> int:
        return pos * self.r // self.m

    def positions(self, item) -> list[int]:
        return sorted(set(self.family.indices(item)))

    def insert(self, item) -> None:
        bits = self.bits.bits
        for p in self.positions(item):
            if bits[p]:
                self.collided[self.region(p)] = 1
            bits[p] = 1
        self.n += 1

    def query(self, item) -> QueryOutcome:
        return outcome(bool(self.bits.bits[self.family.indices(item)].all()))

    def deletable(self, item) -> bool:
        return any(not self.collided[self.region(p)] for p in self.positions(item))

    def remove(self, item) -> Removal:
        if not self.query(item).present:
            return Removal.NOT_FOUND
        free = [p for p in self.positions(item) if not self.collided[self.region(p)]]
        if not free:
            return Removal.NOT_DELETABLE
        self.bits.bits[free] = 0
        self.n -= 1
        return Removal.REMOVED

    def deletability(self, form: str = "corrected") -> float:
        from .formulas import deletable

        return deletable(self.m, self.k, self.n, self.r, form)

    @property
    def size_bits(self) -> int:
        return self.m + self.r

    def params(self):
        return {"m": self.m, "k": self.k, "r": self.r}

    def formula_params(self):
        return {"m": self.m, "k": self.k, "n": self.n}

    def _arrays(self):
        return [(self.bits.bits, 1), (self.collided, 1)]

    def _restore_arrays(self, arrays):
        self.bits = BitVector(self.m, arrays[0])
        self.collided = np.asarray(arrays[1], dtype=np.uint8).copy()


def _dsbf_rates(dim, eps, delta, n, g, k, t, bf_fpp):
    p_near = (1.0 - eps / dim) ** g
    p_far = 1.0 - (1.0 - (1.0 - delta / dim) ** g) ** n
    p_far = p_far + (1.0 - p_far) * bf_fpp
    miss = stats.binom.cdf(t - 1, k, p_near)
    false_near = stats.binom.sf(t - 1, k, p_far)
    return float(miss), float(false_near)


def dsbf_parameters(dim: int, eps: float, delta: float, n: int, beta: float = 0.05,
                    gamma: float = 0.05, bf_fpp: float = 0.01, k_max: int = 255):
    """Smallest ``(g, k, t)`` whose predicted miss and false-near rates are within ``beta`` and ``gamma``."""
    if eps == 0:
        return dim, 1, 1
    for k in range(1, k_max + 1):
        t = math.ceil(k / 2)
        for g in range(1, dim + 1):
            miss, false_near = _dsbf_rates(dim, eps, delta, n, g, k, t, bf_fpp)
            if miss > beta:
                break
            if false_near <= gamma:
                return g, k, t
    raise ParameterError("no (g, k) meets the requested error rates; widen delta - eps")


class DistanceSensitiveBF(MembershipFilter):
    """Approximate "is there a member within distance eps" for bit vectors.

    Each of ``k`` locality-sensitive functions samples ``g`` coordinates; the
    pair (function id, sampled bits) is stored in one standard filter.  A probe
    is near when at least ``t = ceil(k/2)`` of its pairs are found.
    """

    variant = Variant.DISTANCE_SENSITIVE
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=True)

    def __init__(self, dim: int, eps: float, delta: float, n_expected: int, seed: int = 0,
                 g: int | None = None, k: int | None = None, bits_per_entry: int = 10,
                 beta: float = 0.05, gamma: float = 0.05):
        if dim < 1:
            raise ParameterError("dim must be positive")
        if not 0 <= eps < delta <= dim:
            raise ParameterError("need 0 <= eps < delta <= dim")
        if n_expected < 1:
            raise ParameterError("n_expected must be positive")
        self.dim, self.eps, self.delta, self.n_expected = dim, eps, delta, n_expected
        self.bits_per_entry = bits_per_entry
        self.seed = seed
        bf_k = max(1, round(math.log(2) * bits_per_entry))
        bf_fpp = (1 - math.exp(-bf_k / bits_per_entry)) ** bf_k
        if g is None or k is None:
            g, k, _ = dsbf_parameters(dim, eps, delta, n_expected, beta, gamma, bf_fpp)
        self.g, self.k = g, k
        self.t = math.ceil(k / 2)
        rng = np.random.default_rng(hash64(b"dsbf-sampling", seed))
        self.samples = np.stack([np.sort(rng.choice(dim, size=g, replace=False)) for _ in range(k)])
        self.buckets = StandardBF(max(2, n_expected * k * bits_per_entry), bf_k, seed,
                                  hashes=HashFamily(bf_k, max(2, n_expected * k * bits_per_entry),
                                                    seed, b"dsbf"))
        self.n = 0

    def _vector(self, v) -> np.ndarray:
        arr = np.asarray(v, dtype=np.uint8).ravel()
        if arr.shape != (self.dim,):
            raise InputError(f"expected a vector of length {self.dim}, got {arr.size}")
        return arr

    def keys(self, v) -> list[bytes]:
        arr = self._vector(v)
        return [bytes([j & 0xFF, j >> 8]) + np.packbits(arr[s]).tobytes()
                for j, s in enumerate(self.samples)]

    def insert(self, item) -> None:
        for key in self.keys(item):
            self.buckets.insert(key)
        self.n += 1

    def votes(self, item) -> int:
        return sum(self.buckets.query(key).present for key in self.keys(item))

    def query(self, item) -> QueryOutcome:
        return outcome(self.votes(item) >= self.t)

    def predicted_rates(self) -> tuple[float, float]:
        """Predicted (miss rate for probes within eps, near rate for probes beyond delta)."""
        return _dsbf_rates(self.dim, self.eps, self.delta, max(1, self.n), self.g, self.k, self.t,
                           self.buckets.predicted_fpp())

    @property
    def size_bits(self) -> int:
        return self.buckets.m

    def params(self):
        return {"dim": self.dim, "eps": self.eps, "delta": self.delta,
                "n_expected": self.n_expected, "g": self.g, "k": self.k,
                "bits_per_entry": self.bits_per_entry}

    def formula_params(self):
        return self.buckets.formula_params()

    def _arrays(self):
        return [(self.buckets.bits.bits, 1)]

    def _restore_arrays(self, arrays):
        self.buckets.bits = BitVector(self.buckets.m, arrays[0])

    def _extra_state(self):
        return {"n": self.n, "bucket_n": self.buckets.n}

    def _restore_extra(self, state):
        self.n = int(state.get("n", 0))
        self.buckets.n = int(state.get("bucket_n", 0))


class CuckooFilter(MembershipFilter):
    """Cuckoo filter with partial-key hashing.

    ``num_buckets`` (a power of two) buckets hold up to ``b`` fingerprints of
    ``f`` bits.  The alternate bucket is ``i XOR (hash(fp) mod num_buckets)``,
    an involution.  When relocation exceeds ``max_kicks`` the whole kick chain
    is undone and :class:`FilterFullError` is raised, leaving the table as it
    was before the call.
    """

    variant = Variant.CUCKOO
    capabilities = Capabilities(counting=False, deletion=True, false_negatives_possible=False)
    formula = "Cuckoo_Eq30"

    def __init__(self, num_buckets: int, b: int = 4, f: int = 12, max_kicks: int = 500,
                 seed: int = 0):
        if not is_power_of_two(num_buckets):
            raise ParameterError("num_buckets must be a power of two")
        if b < 1 or max_kicks < 0:
            raise ParameterError("b must be >= 1 and max_kicks >= 0")
        if not 1 <= f <= 32:
            raise ParameterError("fingerprint width must be in [1, 32]")
        self.num_buckets, self.b, self.f, self.max_kicks = num_buckets, b, f, max_kicks
        self.seed = seed
        self.buckets: list[list[int]] = [[] for _ in range(num_buckets)]
        self.rng = random.Random(seed)
        self._alt_cache: dict[int, int] = {}
        self.n = 0
        self.failures = 0

    def fingerprint(self, item) -> int:
        return fingerprint(item, self.f, self.seed)

    def alt_hash(self, fp: int) -> int:
        h = self._alt_cache.get(fp)
        if h is None:
            h = hash64(fp, self.seed, b"alt") % self.num_buckets
            self._alt_cache[fp] = h
        return h

    def alt_index(self, i: int, fp: int) -> int:
        return i ^ self.alt_hash(fp)

    def index_pair(self, item) -> tuple[int, int, int]:
        fp = self.fingerprint(item)
        i1 = hash64(item, self.seed, b"bucket") % self.num_buckets
        return fp, i1, self.alt_index(i1, fp)

    def insert(self, item) -> None:
        fp, i1, i2 = self.index_pair(item)
        for i in (i1, i2):
            if len(self.buckets[i]) < self.b:
                self.buckets[i].append(fp)
                self.n += 1
                return
        i = self.rng.choice((i1, i2))
        swaps = []
        for _ in range(self.max_kicks):
            slot = self.rng.randrange(self.b)
            victim = self.buckets[i][slot]
            self.buckets[i][slot] = fp
            swaps.append((i, slot, victim))
            fp = victim
            i = self.alt_index(i, fp)
            if len(self.buckets[i]) < self.b:
                self.buckets[i].append(fp)
                self.n += 1
                return
        for i, slot, victim in reversed(swaps):
            self.buckets[i][slot] = victim
        self.failures += 1
        raise FilterFullError("cuckoo relocation budget exhausted",
                              {"n": self.n, "load": self.load_factor(), "kicks": len(swaps)})

    def query(self, item) -> QueryOutcome:
        fp, i1, i2 = self.index_pair(item)
        return outcome(fp in self.buckets[i1] or fp in self.buckets[i2])

    def remove(self, item) -> Removal:
        fp, i1, i2 = self.index_pair(item)
        for i in (i1, i2):
            if fp in self.buckets[i]:
                self.buckets[i].remove(fp)
                self.n -= 1
                return Removal.REMOVED
        return Removal.NOT_FOUND

    def load_factor(self) -> float:
        return self.n / (self.num_buckets * self.b)

    def audit(self, items=None) -> bool:
        """Check every stored fingerprint can reach its partner bucket and back.

        With ``items`` (the multiset currently stored) also check that each
        bucket's fingerprints are exactly those of items having it as a candidate.
        """
        for i, bucket in enumerate(self.buckets):
            if len(bucket) > self.b:
                return False
            for fp in bucket:
                j = self.alt_index(i, fp)
                if not 0 <= j < self.num_buckets or self.alt_index(j, fp) != i:
                    return False
        if items is None:
            return True
        from collections import Counter

        stored = Counter()
        for i, bucket in enumerate(self.buckets):
            for fp in bucket:
                stored[(fp, min(i, self.alt_index(i, fp)))] += 1
        expected = Counter()
        for item in items:
            fp, i1, i2 = self.index_pair(item)
            expected[(fp, min(i1, i2))] += 1
        return stored == expected

    @property
    def size_bits(self) -> int:
        return self.num_buckets * self.b * self.f

    def params(self):
        return {"num_buckets": self.num_buckets, "b": self.b, "f": self.f, "max_kicks": self.max_kicks}

    def formula_params(self):
        return {"f": self.f, "b": self.b, "alpha": self.load_factor()}

    def _arrays(self):
        flat = np.zeros(self.num_buckets * self.b, dtype=np.uint32)
        for i, bucket in enumerate(self.buckets):
            flat[i * self.b: i * self.b + len(bucket)] = bucket
        return [(flat, self.f)]

    def _restore_arrays(self, arrays):
        flat = np.asarray(arrays[0], dtype=np.int64).reshape(self.num_buckets, self.b)
        self.buckets = [[int(x) for x in row if x] for row in flat]


class PersistentBF(MembershipFilter):
    """Time-sliced filter: one standard filter per slot of ``granularity`` time units.

    A range query covers every slot from ``floor(t1/g)`` to ``floor(t2/g)``
    inclusive.
    """

    variant = Variant.PERSISTENT
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=False)
    formula = "PBF_range"

    def __init__(self, m: int, k: int, granularity: float, seed: int = 0):
        _check_mk(m, k)
        if not granularity > 0:
            raise ParameterError("granularity must be positive")
        self.m, self.k, self.granularity = m, k, granularity
        self.seed = seed
        self.family = HashFamily(k, m, seed)
        self.slots: dict[int, StandardBF] = {}
        self.n = 0

    @property
    def serializable(self) -> bool:
        return True

    def slot_of(self, t: float) -> int:
        return math.floor(t / self.granularity)

    def slot(self, s: int) -> StandardBF:
        if s not in self.slots:
            self.slots[s] = StandardBF(self.m, self.k, self.seed, hashes=self.family)
        return self.slots[s]

    def insert(self, item, t: float = 0.0) -> None:
        self.slot(self.slot_of(t)).insert(item)
        self.n += 1

    def slot_range(self, t1: float, t2: float) -> range:
        if t1 > t2:
            raise ParameterError("range start is after its end")
        return range(self.slot_of(t1), self.slot_of(t2) + 1)

    def query_range(self, item, t1: float, t2: float) -> QueryOutcome:
        span = self.slot_range(t1, t2)
        for s in sorted(self.slots):
            if s in span and self.slots[s].query(item).present:
                return outcome(True)
        return ABSENT

    def query(self, item, t1: float | None = None, t2: float | None = None) -> QueryOutcome:
        if t1 is None and t2 is None:
            return outcome(any(bf.query(item).present for bf in self.slots.values()))
        t1 = t2 if t1 is None else t1
        t2 = t1 if t2 is None else t2
        return self.query_range(item, t1, t2)

    def range_fpp(self, t1: float, t2: float) -> float:
        from .formulas import persistent_range, sbf

        span = self.slot_range(t1, t2)
        loads = [self.slots[s].n if s in self.slots else 0 for s in span]
        eps = sbf(self.m, self.k, sum(loads) / len(loads))
        return persistent_range(len(loads), eps=eps)

    @property
    def size_bits(self) -> int:
        return self.m * len(self.slots)

    def params(self):
        return {"m": self.m, "k": self.k, "granularity": self.granularity}

    def formula_params(self):
        loads = [bf.n for bf in self.slots.values()] or [0]
        from .formulas import sbf

        return {"slots": 1, "eps": sbf(self.m, self.k, sum(loads) / len(loads))}

    def _arrays(self):
        return [(self.slots[s].bits.bits, 1) for s in sorted(self.slots)]

    def _restore_arrays(self, arrays):
        self._pending = arrays

    def _extra_state(self):
        ids = sorted(self.slots)
        return {"n": self.n, "slot_ids": ids, "slot_n": [self.slots[s].n for s in ids]}

    def _restore_extra(self, state):
        self.n = int(state.get("n", 0))
        arrays = getattr(self, "_pending", [])
        self.slots = {}
        for s, n, bits in zip(state.get("slot_ids", []), state.get("slot_n", []), arrays):
            bf = self.slot(int(s))
            bf.bits = BitVector(self.m, bits)
            bf.n = int(n)
        self._pending = None


class HDBF(MembershipFilter):
    """Counting filter over real vectors using ``k`` quantizing vector hashes."""

    variant = Variant.HIGH_DIMENSIONAL
    capabilities = Capabilities(counting=True, deletion=True, false_negatives_possible=False,
                                result_kind=ResultKind.BOOLEAN_FREQUENCY, fn_qualified=True)
    formula = "HDBF_fpp"

    def __init__(self, m: int, k: int, q: int = 16, seed: int = 0, lo: float = 0.0,
                 hi: float = 1.0, width: int = 8):
        _check_mk(m, k)
        self.m, self.k, self.q, self.lo, self.hi, self.width = m, k, q, lo, hi, width
        self.seed = seed
        self.hashers = [VectorHasher(q, hash64(i, seed, b"hdbf-seed"), lo, hi) for i in range(k)]
        self.counters = CounterVector(m, width)
        self.n = 0

    def positions(self, v) -> list[int]:
        return sorted({h(v) % self.m for h in self.hashers})

    def insert(self, item) -> None:
        for p in self.positions(item):
            self.counters.increment(p)
        self.n += 1

    def count_estimate(self, item) -> int:
        return min(self.counters[p] for p in self.positions(item))

    def query(self, item) -> QueryOutcome:
        c = self.count_estimate(item)
        return outcome(c > 0, frequency=c)

    def remove(self, item) -> Removal:
        pos = self.positions(item)
        if any(self.counters[p] == 0 for p in pos):
            return Removal.NOT_FOUND
        for p in pos:
            self.counters.decrement(p)
        self.n -= 1
        return Removal.REMOVED

    @property
    def size_bits(self) -> int:
        return self.m * self.width

    def params(self):
        return {"m": self.m, "k": self.k, "q": self.q, "lo": self.lo, "hi": self.hi,
                "width": self.width}

    def formula_params(self):
        return {"m": self.m, "k": self.k, "n": self.n}

    def _arrays(self):
        return [(self.counters.counts, self.width)]

    def _restore_arrays(self, arrays):
        self.counters = CounterVector(self.m, self.width, arrays[0])
