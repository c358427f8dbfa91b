"""Standard, Counting, Spectral and Adaptive Bloom filters."""

from __future__ import annotations

from .api import (ABSENT, Capabilities, MembershipFilter, QueryOutcome, Removal, ResultKind,
                  Variant, outcome)
from .bitarrays import BitVector, CounterVector
from .errors import ParameterError
from .hashing import HashFamily


def _check_mk(m, k):
    if m < 2:
        raise ParameterError(f"m must be >= 2, got {m}")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")


class HashedFilter(MembershipFilter):
    """Shared plumbing for filters indexed by one :class:`HashFamily`.

    Filters built on a scripted (test) hash family cannot be serialized.
    """

    family: HashFamily

    @property
    def serializable(self) -> bool:
        return not getattr(self.family, "scripted", False)


class StandardBF(HashedFilter):
    """The classic bit-array filter with ``k`` hash functions over ``m`` bits."""

    variant = Variant.STANDARD
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=False)

    def __init__(self, m: int, k: int, seed: int = 0, hashes=None):
        _check_mk(m, k)
        self.m = m
        self.k = k
        self.seed = seed
        self.family = hashes if hashes is not None else HashFamily(k, m, seed)
        self.bits = BitVector(m)
        self.n = 0

    def insert(self, item) -> None:
        self.bits.bits[self.family.indices(item)] = 1
        self.n += 1

    def insert_many(self, items) -> None:
        items = list(items)
        idx = self.family.indices_many(items)
        self.bits.bits[idx.ravel()] = 1
        self.n += len(items)

    def query(self, item) -> QueryOutcome:
        bits = self.bits.bits
        for i in self.family.indices(item):
            if not bits[i]:
                return ABSENT
        return outcome(True)

    def query_many(self, items) -> list[bool]:
        idx = self.family.indices_many(list(items))
        if idx.shape[0] == 0:
            return []
        return self.bits.bits[idx].all(axis=1).tolist()

    @property
    def size_bits(self) -> int:
        return self.m

    def params(self):
        return {"m": self.m, "k": self.k}

    def formula_params(self):
        return {"m": self.m, "k": self.k, "n": self.n}

    def _arrays(self):
        return [(self.bits.bits, 1)]

    def _restore_arrays(self, arrays):
        self.bits = BitVector(self.m, arrays[0])


class CountingBF(HashedFilter):
    """Bloom filter with ``width``-bit saturating counters (4 bits by default).

    Each insertion increments the distinct counters among the item's ``k``
    positions.  A saturated counter is never decremented again; saturations are
    reported by :meth:`stats`.
    """

    variant = Variant.COUNTING
    capabilities = Capabilities(counting=True, deletion=True, false_negatives_possible=False,
                                result_kind=ResultKind.BOOLEAN_FREQUENCY, fn_qualified=True)

    def __init__(self, m: int, k: int, seed: int = 0, width: int = 4, hashes=None):
        _check_mk(m, k)
        self.m = m
        self.k = k
        self.width = width
        self.seed = seed
        self.family = hashes if hashes is not None else HashFamily(k, m, seed)
        self.counters = CounterVector(m, width)
        self.n = 0

    def positions(self, item) -> list[int]:
        return sorted(set(self.family.indices(item)))

    def insert(self, item) -> None:
        for i in self.positions(item):
            self.counters.increment(i)
        self.n += 1

    def remove(self, item) -> Removal:
        pos = self.positions(item)
        if any(self.counters[i] == 0 for i in pos):
            return Removal.NOT_FOUND
        for i in pos:
            self.counters.decrement(i)
        self.n -= 1
        return Removal.REMOVED

    def count_estimate(self, item) -> int:
        return min(self.counters[i] for i in self.positions(item))

    def query(self, item) -> QueryOutcome:
        c = self.count_estimate(item)
        return outcome(c > 0, frequency=c)

    def query_many(self, items) -> list[bool]:
        idx = self.family.indices_many(list(items))
        if idx.shape[0] == 0:
            return []
        return (self.counters.counts[idx].min(axis=1) > 0).tolist()

    def stats(self) -> dict:
        return {"saturation_events": self.counters.saturation_events,
                "saturated_counters": self.counters.saturated()}

    @property
    def size_bits(self) -> int:
        return self.m * self.width

    def params(self):
        return {"m": self.m, "k": self.k, "width": self.width}

    def formula_params(self):
        return {"m": self.m, "k": self.k, "n": self.n}

    def _arrays(self):
        return [(self.counters.counts, self.width)]

    def _restore_arrays(self, arrays):
        self.counters = CounterVector(self.m, self.width, arrays[0])

    def _extra_state(self):
        return {"n": self.n, "saturation_events": self.counters.saturation_events}

    def _restore_extra(self, state):
        self.n = int(state.get("n", 0))
        self.counters.saturation_events = int(state.get("saturation_events", 0))


class SpectralBF(CountingBF):
    """Frequency-estimating counting filter.

    In ``minimum_increase`` mode an insertion increments only the counters
    that currently hold the item's minimum value, which tightens the estimate
    for frequent items.  Removal in that mode decrements only the minimum
    counters as well; this can undercount other items, so deletions are only
    safe in ``plain`` mode.
    """

    variant = Variant.SPECTRAL
    capabilities = Capabilities(counting=True, deletion=True, false_negatives_possible=False,
                                result_kind=ResultKind.FREQUENCY, fn_qualified=True)
    MODES = ("minimum_increase", "plain")

    def __init__(self, m: int, k: int, seed: int = 0, width: int = 8,
                 mode: str = "minimum_increase", hashes=None):
        if mode not in self.MODES:
            raise ParameterError(f"mode must be one of {self.MODES}, got {mode!r}")
        super().__init__(m, k, seed, width, hashes)
        self.mode = mode

    def insert(self, item) -> None:
        pos = self.positions(item)
        if self.mode == "minimum_increase":
            low = min(self.counters[i] for i in pos)
            pos = [i for i in pos if self.counters[i] == low]
        for i in pos:
            self.counters.increment(i)
        self.n += 1

    def remove(self, item) -> Removal:
        pos = self.positions(item)
        values = [self.counters[i] for i in pos]
        low = min(values)
        if low == 0:
            return Removal.NOT_FOUND
        if self.mode == "minimum_increase":
            pos = [i for i, v in zip(pos, values) if v == low]
        for i in pos:
            self.counters.decrement(i)
        self.n -= 1
        return Removal.REMOVED

    def params(self):
        return {"m": self.m, "k": self.k, "width": self.width, "mode": self.mode}


class AdaptiveBF(HashedFilter):
    """Bit-array filter that records multiplicity with extra hash functions.

    An insertion sets the ``k`` base positions and then probes functions
    ``k+1, k+2, ...`` setting the first position that is still zero (at most
    ``max_probe`` probes).  The count of an item is the length of the run of
    set extra positions.
    """

    variant = Variant.ADAPTIVE
    capabilities = Capabilities(counting=True, deletion=False, false_negatives_possible=False)

    def __init__(self, m: int, k: int, seed: int = 0, max_probe: int = 16, hashes=None):
        _check_mk(m, k)
        if max_probe < 1:
            raise ParameterError("max_probe must be >= 1")
        self.m = m
        self.k = k
        self.max_probe = max_probe
        self.seed = seed
        self.family = hashes if hashes is not None else HashFamily(k + max_probe, m, seed)
        if self.family.k != k + max_probe:
            raise ParameterError("hash family must provide k + max_probe functions")
        self.bits = BitVector(m)
        self.n = 0

    def insert(self, item) -> None:
        idx = self.family.indices(item)
        bits = self.bits.bits
        bits[idx[: self.k]] = 1
        for p in idx[self.k:]:
            if not bits[p]:
                bits[p] = 1
                break
        self.n += 1

    def count_estimate(self, item) -> int:
        idx = self.family.indices(item)
        bits = self.bits.bits
        if not all(bits[i] for i in idx[: self.k]):
            return 0
        count = 0
        for p in idx[self.k:]:
            if not bits[p]:
                break
            count += 1
        return count

    def query(self, item) -> QueryOutcome:
        idx = self.family.indices(item)
        if not all(self.bits.bits[i] for i in idx[: self.k]):
            return ABSENT
        return outcome(True, frequency=self.count_estimate(item))

    def query_many(self, items) -> list[bool]:
        idx = self.family.indices_many(list(items))
        if idx.shape[0] == 0:
            return []
        return self.bits.bits[idx[:, : self.k]].all(axis=1).tolist()

    @property
    def size_bits(self) -> int:
        return self.m

    def params(self):
        return {"m": self.m, "k": self.k, "max_probe": self.max_probe}

    def formula_params(self):
        # each insertion sets about k + 1 bits while a query checks k
        return {"m": self.m, "k": self.k, "n": self.n * (self.k + 1) / self.k}

    def _arrays(self):
        return [(self.bits.bits, 1)]

    def _restore_arrays(self, arrays):
        self.bits = BitVector(self.m, arrays[0])
