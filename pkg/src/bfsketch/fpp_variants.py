"""Variants that trade memory, extra state or false negatives for fewer false positives."""

from __future__ import annotations

import warnings
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .api import (ABSENT, Capabilities, MembershipFilter, QueryOutcome, Removal, ResultKind,
                  Variant, Verdict, outcome)
from .bitarrays import BitVector, CounterVector
from .classic import HashedFilter, StandardBF, _check_mk
from .errors import CapabilityError, InputError, ParameterError
from .hashing import HashFamily, canonical, fingerprint, hash64


class YesNoBF(HashedFilter):
    """A yes-filter of ``p`` bits plus ``r`` no-filters of ``q`` bits each.

    Members go into the yes-filter.  Items observed to be false positives are
    reported and recorded in exactly one no-filter (chosen by hashing); a hit
    in that no-filter turns a positive yes-answer into a negative one, which
    can also hide genuine members.
    """

    variant = Variant.YES_NO
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=True)
    formula = "YesNo_Eq5"

    def __init__(self, p: int, q: int, r: int, k: int, k_prime: int, seed: int = 0,
                 strict: bool = True):
        _check_mk(p, k)
        _check_mk(q, k_prime)
        if r < 1:
            raise ParameterError("r must be >= 1")
        if k_prime >= k:
            raise ParameterError("k_prime must be smaller than k")
        if strict and p < 4 * r * q:
            raise ParameterError(f"yes-filter too small: p={p} < 4*r*q={4 * r * q}")
        self.p, self.q, self.r, self.k, self.k_prime = p, q, r, k, k_prime
        self.strict = strict
        self.seed = seed
        self.family = HashFamily(k, p, seed, b"yes")
        self.no_family = HashFamily(k_prime, q, seed, b"no")
        self.yes_bits = BitVector(p)
        self.no_bits = np.zeros((r, q), dtype=np.uint8)
        self.n = 0
        self.n_no = 0

    def select(self, item) -> int:
        return hash64(item, self.seed, b"select") % self.r

    def insert(self, item) -> None:
        self.yes_bits.bits[self.family.indices(item)] = 1
        self.n += 1

    def _yes(self, item) -> bool:
        return bool(self.yes_bits.bits[self.family.indices(item)].all())

    def _no(self, item) -> bool:
        return bool(self.no_bits[self.select(item), self.no_family.indices(item)].all())

    def query(self, item) -> QueryOutcome:
        if self._yes(item) and not self._no(item):
            return outcome(True)
        return ABSENT

    def report_false_positive(self, item) -> bool:
        """Record ``item`` as a false positive; returns False if it is not currently positive."""
        if not self.query(item).present:
            return False
        self.no_bits[self.select(item), self.no_family.indices(item)] = 1
        self.n_no += 1
        return True

    @property
    def size_bits(self) -> int:
        return self.p + self.r * self.q

    def params(self):
        return {"p": self.p, "q": self.q, "r": self.r, "k": self.k, "k_prime": self.k_prime,
                "strict": self.strict}

    def formula_params(self):
        return {"p": self.p, "q": self.q, "k": self.k, "k_prime": self.k_prime, "n": self.n}

    def _arrays(self):
        return [(self.yes_bits.bits, 1), (self.no_bits.ravel(), 1)]

    def _restore_arrays(self, arrays):
        self.yes_bits = BitVector(self.p, arrays[0])
        self.no_bits = np.asarray(arrays[1], dtype=np.uint8).reshape(self.r, self.q).copy()

    def _extra_state(self):
        return {"n": self.n, "n_no": self.n_no}

    def _restore_extra(self, state):
        self.n = int(state.get("n", 0))
        self.n_no = int(state.get("n_no", 0))


@lru_cache(maxsize=None)
def _sums_exactly(L: tuple[int, ...], target: int, count: int) -> bool:
    """Is ``target`` a sum of exactly ``count`` elements of ``L`` (with repetition)?"""
    if count == 0:
        return target == 0
    if target < count * L[0] or target > count * L[-1]:
        return False
    return any(_sums_exactly(L, target - v, count - 1) for v in L)


@lru_cache(maxsize=None)
def _sums_any(L: tuple[int, ...], target: int) -> bool:
    """Is ``target`` a sum of zero or more elements of ``L``?"""
    if target == 0:
        return True
    if target < L[0]:
        return False
    return any(_sums_any(L, target - v) for v in L if v <= target)


def vicbf_cell_check(c1: int | None, c2: int, v: int, L: Sequence[int] = (2, 3, 4, 5),
                     scheme: str = "bh") -> bool:
    """True when a cell is consistent with holding an item of increment ``v`` (maybe-present)."""
    L = tuple(sorted(L))
    if v not in L:
        raise ParameterError(f"increment {v} is not in L={L}")
    if scheme == "bh":
        if c1 is None or c1 == 0:
            return False
        if c1 == 1:
            return c2 == v
        return _sums_exactly(L, c2 - v, c1 - 1)
    if scheme == "vi":
        if c2 < v:
            return False
        return _sums_any(L, c2 - v)
    raise ParameterError(f"unknown scheme {scheme!r}")


class VICBF(HashedFilter):
    """Variable-increment counting filter.

    Each of an item's ``k`` cells receives an increment drawn from ``L`` by a
    second hash family.  The ``bh`` scheme keeps a count ``c1`` and a sum
    ``c2`` per cell; the ``vi`` scheme keeps only the sum.  A query rejects an
    item whenever some cell's sum cannot contain that item's increment.

    A cell whose counters would overflow is pinned at its maximum sum and is
    treated as always consistent (sticky saturation).
    """

    variant = Variant.VI_CBF
    capabilities = Capabilities(counting=True, deletion=True, false_negatives_possible=False,
                                result_kind=ResultKind.BOOLEAN_FREQUENCY, fn_qualified=True)
    SCHEMES = ("bh", "vi")

    def __init__(self, m: int, k: int, seed: int = 0, scheme: str = "bh",
                 L: Sequence[int] = (2, 3, 4, 5), c1_bits: int = 3, c2_bits: int = 5,
                 hashes=None, increment_hashes=None):
        _check_mk(m, k)
        if scheme not in self.SCHEMES:
            raise ParameterError(f"scheme must be one of {self.SCHEMES}")
        L = tuple(sorted(int(v) for v in L))
        if len(L) < 2 or len(set(L)) != len(L) or L[0] < 1:
            raise ParameterError("L must hold at least two distinct positive increments")
        if (1 << c2_bits) - 1 < L[-1]:
            raise ParameterError("c2_bits too small for the largest increment")
        self.m, self.k, self.scheme, self.L = m, k, scheme, L
        self.c1_bits = c1_bits if scheme == "bh" else 0
        self.c2_bits = c2_bits
        self.seed = seed
        self.family = hashes if hashes is not None else HashFamily(k, m, seed)
        self.inc_family = (increment_hashes if increment_hashes is not None
                           else HashFamily(k, len(L), seed, b"increment"))
        self.c1_max = (1 << self.c1_bits) - 1
        self.c2_max = (1 << c2_bits) - 1
        self.c1 = np.zeros(m, dtype=np.int64)
        self.c2 = np.zeros(m, dtype=np.int64)
        self.n = 0
        self.saturation_events = 0

    def cells(self, item) -> dict[int, int]:
        """Distinct positions of ``item`` mapped to their increments (first function wins)."""
        out: dict[int, int] = {}
        for pos, j in zip(self.family.indices(item), self.inc_family.indices(item)):
            out.setdefault(pos, self.L[j])
        return out

    def _saturated(self, pos: int) -> bool:
        return self.c2[pos] == self.c2_max

    def insert(self, item) -> None:
        for pos, v in self.cells(item).items():
            if self._saturated(pos):
                continue
            c1 = self.c1[pos] + 1
            c2 = self.c2[pos] + v
            if c2 >= self.c2_max or (self.scheme == "bh" and c1 > self.c1_max):
                self.c1[pos] = self.c1_max
                self.c2[pos] = self.c2_max
                self.saturation_events += 1
            else:
                if self.scheme == "bh":
                    self.c1[pos] = c1
                self.c2[pos] = c2
        self.n += 1

    def _cell_ok(self, pos: int, v: int) -> bool:
        if self._saturated(pos):
            return True
        c1 = int(self.c1[pos]) if self.scheme == "bh" else None
        c2 = int(self.c2[pos])
        if c2 == 0:
            return False
        return vicbf_cell_check(c1, c2, v, self.L, self.scheme)

    def query(self, item) -> QueryOutcome:
        cells = self.cells(item)
        if all(self._cell_ok(pos, v) for pos, v in cells.items()):
            return outcome(True, frequency=self._estimate(cells))
        return ABSENT

    def _estimate(self, cells) -> int:
        if self.scheme == "bh":
            return int(min(self.c1[pos] for pos in cells))
        return int(min(self.c2[pos] // v for pos, v in cells.items()))

    def count_estimate(self, item) -> int:
        q = self.query(item)
        return q.frequency if q.present else 0

    def remove(self, item) -> Removal:
        cells = self.cells(item)
        if not all(self._cell_ok(pos, v) for pos, v in cells.items()):
            return Removal.NOT_FOUND
        for pos, v in cells.items():
            if self._saturated(pos):
                continue
            if self.scheme == "bh":
                self.c1[pos] -= 1
            self.c2[pos] -= v
        self.n -= 1
        return Removal.REMOVED

    @property
    def size_bits(self) -> int:
        return self.m * (self.c1_bits + self.c2_bits)

    def params(self):
        return {"m": self.m, "k": self.k, "scheme": self.scheme, "L": list(self.L),
                "c1_bits": self.c1_bits if self.scheme == "bh" else 3, "c2_bits": self.c2_bits}

    @property
    def formula(self):
        return "Bh_Eq6" if self.scheme == "bh" else "VICBF_Eq8"

    def formula_params(self):
        if self.scheme == "bh":
            return {"m": self.m, "k": self.k, "n": self.n, "l": len(self.L)}
        return {"m": self.m, "k": self.k, "n": self.n, "L": len(self.L)}

    def _arrays(self):
        arrays = [(self.c2, self.c2_bits)]
        if self.scheme == "bh":
            arrays.insert(0, (self.c1, self.c1_bits))
        return arrays

    def _restore_arrays(self, arrays):
        if self.scheme == "bh":
            self.c1 = np.asarray(arrays[0], dtype=np.int64).copy()
        self.c2 = np.asarray(arrays[-1], dtype=np.int64).copy()

    def _extra_state(self):
        return {"n": self.n, "saturation_events": self.saturation_events}

    def _restore_extra(self, state):
        self.n = int(state.get("n", 0))
        self.saturation_events = int(state.get("saturation_events", 0))


class FPCBF(HashedFilter):
    """Counting filter whose cells also hold an XOR of ``f``-bit fingerprints.

    A query additionally requires that every cell whose counter is exactly 1
    holds the item's own fingerprint.
    """

    variant = Variant.FP_CBF
    capabilities = Capabilities(counting=True, deletion=True, false_negatives_possible=False,
                                fn_qualified=True)
    formula = "FPCBF_Eq9"

    def __init__(self, m: int, k: int, seed: int = 0, c: int = 4, f: int = 8, hashes=None):
        _check_mk(m, k)
        if not 1 <= f <= 32:
            raise ParameterError("fingerprint width must be in [1, 32]")
        self.m, self.k, self.c, self.f = m, k, c, f
        self.seed = seed
        self.family = hashes if hashes is not None else HashFamily(k, m, seed)
        self.counters = CounterVector(m, c)
        self.fp = np.zeros(m, dtype=np.uint32)
        self.n = 0

    def positions(self, item) -> list[int]:
        return sorted(set(self.family.indices(item)))

    def fingerprint(self, item) -> int:
        return fingerprint(item, self.f, self.seed)

    def insert(self, item) -> None:
        h = self.fingerprint(item)
        for i in self.positions(item):
            self.counters.increment(i)
            self.fp[i] ^= h
        self.n += 1

    def query(self, item) -> QueryOutcome:
        h = self.fingerprint(item)
        pos = self.positions(item)
        counts = [self.counters[i] for i in pos]
        if min(counts) == 0:
            return ABSENT
        for i, c in zip(pos, counts):
            if c == 1 and self.fp[i] != h:
                return ABSENT
        return outcome(True, frequency=min(counts))

    def count_estimate(self, item) -> int:
        q = self.query(item)
        return q.frequency if q.present else 0

    def remove(self, item) -> Removal:
        if not self.query(item).present:
            return Removal.NOT_FOUND
        h = self.fingerprint(item)
        for i in self.positions(item):
            if self.counters.decrement(i):
                self.fp[i] ^= h
        self.n -= 1
        return Removal.REMOVED

    @property
    def size_bits(self) -> int:
        return self.m * (self.c + self.f)

    def params(self):
        return {"m": self.m, "k": self.k, "c": self.c, "f": self.f}

    def formula_params(self):
        return {"m_prime": self.m, "k": self.k, "n": self.n, "f": self.f}

    def _arrays(self):
        return [(self.counters.counts, self.c), (self.fp, self.f)]

    def _restore_arrays(self, arrays):
        self.counters = CounterVector(self.m, self.c, arrays[0])
        self.fp = np.asarray(arrays[1], dtype=np.uint32).copy()


class RetouchedBF(StandardBF):
    """Standard filter that can clear set bits to remove observed false positives.

    Clearing trades false positives for false negatives; cleared positions are
    logged in ``cleared``.
    """

    variant = Variant.RETOUCHED
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=True)
    formula = "Retouched_fP′"

    def __init__(self, m: int, k: int, seed: int = 0, hashes=None):
        super().__init__(m, k, seed, hashes)
        self.cleared: set[int] = set()
        self._p1_at_first_clear: float | None = None

    def _note_clear(self):
        if self._p1_at_first_clear is None:
            self._p1_at_first_clear = self.bits.popcount() / self.m

    def clear_random(self, s: int, seed: int | None = None) -> list[int]:
        """Clear ``s`` set bits chosen uniformly at random; returns the cleared positions."""
        ones = self.bits.set_positions()
        if s > len(ones):
            warnings.warn(f"asked to clear {s} bits but only {len(ones)} are set; clearing all",
                          stacklevel=2)
            s = len(ones)
        self._note_clear()
        rng = np.random.default_rng(seed)
        chosen = sorted(int(i) for i in rng.choice(ones, size=s, replace=False)) if s else []
        self.bits.bits[chosen] = 0
        self.cleared.update(chosen)
        return chosen

    def clear_targeted(self, items: Iterable) -> list[int]:
        """For each still-positive item, clear its lowest set position."""
        self._note_clear()
        chosen = []
        for item in items:
            if self.query(item).present:
                i = min(self.family.indices(item))
                self.bits.clear(i)
                self.cleared.add(i)
                chosen.append(i)
        return chosen

    def formula_params(self):
        p1 = self._p1_at_first_clear
        if p1 is None:
            p1 = self.bits.popcount() / self.m
        from .formulas import sbf

        return {"f_p": sbf(self.m, self.k, self.n), "p1": max(p1, 1.0 / self.m),
                "m": self.m, "k": self.k, "cleared": len(self.cleared)}

    def _extra_state(self):
        return {"n": self.n, "cleared": sorted(self.cleared), "p1": self._p1_at_first_clear}

    def _restore_extra(self, state):
        self.n = int(state.get("n", 0))
        self.cleared = set(state.get("cleared", []))
        self._p1_at_first_clear = state.get("p1")


def sigma_ratio(fp_before: float, fp_after: float, fn_rate: float) -> float:
    """Proportion of false positives removed divided by the false-negative rate created."""
    if fp_before <= 0 or fn_rate <= 0:
        raise ParameterError("need positive false-positive and false-negative rates")
    return (fp_before - fp_after) / fp_before / fn_rate


class ACBF(HashedFilter):
    """Counting filter stored as a chain of bit levels with rank (popcount) indexing.

    Level 0 has ``s1`` bits and answers membership.  Level ``j+1`` holds one bit
    per set bit of level ``j``; a counter's value is the length of the run of
    ones reached by following ``index_{j+1} = popcount(level_j[:index_j])``.
    Values beyond ``level_count`` are kept in a small overflow map.
    """

    variant = Variant.ACCURATE_COUNTING
    capabilities = Capabilities(counting=True, deletion=True, false_negatives_possible=False,
                                result_kind=ResultKind.BOOLEAN_FREQUENCY, fn_qualified=True)
    formula = "ACBF_opt"

    def __init__(self, m: int, k: int, n_expected: int, seed: int = 0, level_count: int = 4,
                 s1: int | None = None, hashes=None):
        _check_mk(m, k)
        if level_count < 1:
            raise ParameterError("level_count must be >= 1")
        from .formulas import acbf_first_level

        self.m, self.k, self.n_expected, self.level_count = m, k, n_expected, level_count
        self.s1 = s1 if s1 is not None else acbf_first_level(m, k, n_expected)
        if self.s1 < 2:
            raise ParameterError("first level must hold at least 2 bits")
        self.seed = seed
        self.family = hashes if hashes is not None else HashFamily(k, self.s1, seed)
        self.levels: list[bytearray] = [bytearray(self.s1)] + [bytearray() for _ in range(level_count - 1)]
        self.overflow: dict[int, int] = {}
        self.n = 0

    def nominal_sizes(self) -> list[int]:
        return [max(1, self.s1 >> j) for j in range(self.level_count)]

    def capacity_exceeded(self) -> int:
        return sum(len(lv) > cap for lv, cap in zip(self.levels[1:], self.nominal_sizes()[1:]))

    def _chain(self, i: int) -> list[int]:
        """Positions of counter ``i`` at each level while the chain stays set."""
        path = [i]
        for j in range(self.level_count):
            level = self.levels[j]
            p = path[-1]
            if not level[p] or j + 1 == self.level_count:
                break
            path.append(level.count(1, 0, p))
        return path

    def counter(self, i: int) -> int:
        value = 0
        for j, p in enumerate(self._chain(i)):
            if not self.levels[j][p]:
                return value
            value += 1
        return value + self.overflow.get(i, 0)

    def counters(self) -> np.ndarray:
        return np.array([self.counter(i) for i in range(self.s1)], dtype=np.int64)

    def _increment(self, i: int) -> None:
        path = self._chain(i)
        top = len(path) - 1
        level = self.levels[top]
        p = path[top]
        if level[p]:
            # chain saturated the last level
            self.overflow[i] = self.overflow.get(i, 0) + 1
            return
        level[p] = 1
        if top + 1 < self.level_count:
            self.levels[top + 1].insert(level.count(1, 0, p), 0)

    def _decrement(self, i: int) -> None:
        if self.overflow.get(i):
            self.overflow[i] -= 1
            if not self.overflow[i]:
                del self.overflow[i]
            return
        path = self._chain(i)
        # highest level whose bit is set
        top = len(path) - 1
        if not self.levels[top][path[top]]:
            top -= 1
        level = self.levels[top]
        p = path[top]
        level[p] = 0
        if top + 1 < self.level_count:
            del self.levels[top + 1][level.count(1, 0, p)]

    def positions(self, item) -> list[int]:
        return sorted(set(self.family.indices(item)))

    def insert(self, item) -> None:
        for i in self.positions(item):
            self._increment(i)
        self.n += 1

    def count_estimate(self, item) -> int:
        level0 = self.levels[0]
        pos = self.positions(item)
        if not all(level0[i] for i in pos):
            return 0
        return min(self.counter(i) for i in pos)

    def query(self, item) -> QueryOutcome:
        c = self.count_estimate(item)
        return outcome(c > 0, frequency=c)

    def remove(self, item) -> Removal:
        pos = self.positions(item)
        if not all(self.levels[0][i] for i in pos):
            return Removal.NOT_FOUND
        for i in pos:
            self._decrement(i)
        self.n -= 1
        return Removal.REMOVED

    @property
    def size_bits(self) -> int:
        return sum(len(lv) for lv in self.levels)

    def params(self):
        return {"m": self.m, "k": self.k, "n_expected": self.n_expected,
                "level_count": self.level_count, "s1": self.s1}

    def formula_params(self):
        return {"m": self.m, "k": self.k, "n": self.n, "s1": self.s1}

    def _arrays(self):
        return [(np.frombuffer(bytes(lv), dtype=np.uint8), 1) for lv in self.levels]

    def _restore_arrays(self, arrays):
        self.levels = [bytearray(np.asarray(a, dtype=np.uint8).tobytes()) for a in arrays]

    def _extra_state(self):
        return {"n": self.n, "overflow": {str(i): c for i, c in sorted(self.overflow.items())}}

    def _restore_extra(self, state):
        self.n = int(state.get("n", 0))
        self.overflow = {int(i): int(c) for i, c in state.get("overflow", {}).items()}


class GeneralizedBF(HashedFilter):
    """Bit array with ``k1`` reset functions and ``k2`` set functions.

    The array may start from arbitrary contents.  An insertion sets the ``h``
    positions and clears the ``g`` positions; a position hit by both is
    cleared.  Later insertions can overwrite earlier ones, so false negatives
    are possible.
    """

    variant = Variant.GENERALIZED
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=True)
    formula = "GBF_Eq14"

    def __init__(self, m: int, k1: int, k2: int, seed: int = 0, initial=None,
                 reset_hashes=None, set_hashes=None):
        _check_mk(m, k1)
        _check_mk(m, k2)
        self.m, self.k1, self.k2 = m, k1, k2
        self.seed = seed
        self.g = reset_hashes if reset_hashes is not None else HashFamily(k1, m, seed, b"reset")
        self.h = set_hashes if set_hashes is not None else HashFamily(k2, m, seed, b"set")
        self.family = self.g
        if initial is None or (isinstance(initial, str) and initial == "zeros"):
            bits = np.zeros(m, dtype=np.uint8)
        elif isinstance(initial, str) and initial == "random":
            bits = np.random.default_rng(seed).integers(0, 2, size=m, dtype=np.uint8)
        else:
            bits = np.asarray(initial, dtype=np.uint8)
            if bits.shape != (m,) or bits.max(initial=0) > 1:
                raise ParameterError("initial bits must be a 0/1 array of length m")
        self.bits = BitVector(m, bits)
        self.p0 = 1.0 - float(bits.mean())
        self.n = 0

    @property
    def serializable(self) -> bool:
        return not getattr(self.g, "scripted", False) and not getattr(self.h, "scripted", False)

    def insert(self, item) -> None:
        bits = self.bits.bits
        bits[self.h.indices(item)] = 1
        bits[self.g.indices(item)] = 0
        self.n += 1

    def query(self, item) -> QueryOutcome:
        bits = self.bits.bits
        g = set(self.g.indices(item))
        if any(bits[i] for i in g):
            return ABSENT
        if any(not bits[i] for i in self.h.indices(item) if i not in g):
            return ABSENT
        return outcome(True)

    @property
    def size_bits(self) -> int:
        return self.m

    def params(self):
        return {"m": self.m, "k1": self.k1, "k2": self.k2}

    def formula_params(self):
        return {"m": self.m, "k1": self.k1, "k2": self.k2, "n": self.n, "p0": self.p0}

    def _arrays(self):
        return [(self.bits.bits, 1)]

    def _restore_arrays(self, arrays):
        self.bits = BitVector(self.m, arrays[0])

    def _extra_state(self):
        return {"n": self.n, "p0": self.p0}

    def _restore_extra(self, state):
        self.n = int(state.get("n", 0))
        self.p0 = float(state.get("p0", 1.0))


class MultiClassBF(HashedFilter):
    """One bit array shared by several classes, each with its own hash count.

    An item of class ``c`` uses the first ``class_hashes[c]`` functions of a
    common family.  The class comes from ``classifier(item)`` unless passed
    explicitly.
    """

    variant = Variant.MULTI_CLASS
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=False)
    formula = "MCBF_Eq15"

    def __init__(self, m: int, class_hashes: Mapping[str, int], seed: int = 0,
                 presence: Mapping[str, float] | None = None,
                 classifier: Callable[[object], str] | None = None, hashes=None):
        if not class_hashes:
            raise ParameterError("need at least one class")
        k_max = max(class_hashes.values())
        _check_mk(m, min(class_hashes.values()))
        self.m = m
        self.class_hashes = dict(class_hashes)
        self.presence = dict(presence) if presence else {}
        self.classifier = classifier
        self.seed = seed
        self.family = hashes if hashes is not None else HashFamily(k_max, m, seed)
        self.bits = BitVector(m)
        self.load = 0.0
        self.n = 0

    def _class(self, item, cls):
        if cls is None:
            if self.classifier is None:
                raise InputError("no class given and no classifier configured")
            cls = self.classifier(item)
        if cls not in self.class_hashes:
            raise InputError(f"unknown class {cls!r}")
        return cls

    def positions(self, item, cls=None) -> list[int]:
        cls = self._class(item, cls)
        return self.family.indices(item)[: self.class_hashes[cls]]

    def insert(self, item, cls=None) -> None:
        cls = self._class(item, cls)
        self.bits.bits[self.positions(item, cls)] = 1
        self.load += self.class_hashes[cls]
        self.n += 1

    def query(self, item, cls=None) -> QueryOutcome:
        return outcome(bool(self.bits.bits[self.positions(item, cls)].all()))

    def class_fpp(self, cls: str) -> float:
        from .formulas import analytic_fpp

        return analytic_fpp("MCBF_Eq15", m=self.m, k_e=self.class_hashes[cls], load=self.load)

    def expected_load(self, counts: Mapping[str, int]) -> float:
        """Sum of presence probability times hash count over ``counts[c]`` candidates per class."""
        return sum(self.presence.get(c, 1.0) * counts[c] * self.class_hashes[c] for c in counts)

    @property
    def size_bits(self) -> int:
        return self.m

    def params(self):
        return {"m": self.m, "class_hashes": dict(sorted(self.class_hashes.items())),
                "presence": dict(sorted(self.presence.items()))}

    def formula_params(self):
        k_e = min(self.class_hashes.values())
        return {"m": self.m, "k_e": k_e, "load": self.load}

    def _arrays(self):
        return [(self.bits.bits, 1)]

    def _restore_arrays(self, arrays):
        self.bits = BitVector(self.m, arrays[0])

    def _extra_state(self):
        return {"n": self.n, "load": self.load}

    def _restore_extra(self, state):
        self.n = int(state.get("n", 0))
        self.load = float(state.get("load", 0.0))


class ComplementBF(MembershipFilter):
    """A filter for ``S`` and one for its complement over a finite universe.

    A positive from the first filter is confirmed when the complement filter
    is negative.  When both are positive the exact set decides, and the answer
    carries ``needs_oracle=True``.
    """

    variant = Variant.COMPLEMENT
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=False)
    formula = "Complement_Eq22"
    serializable = False

    def __init__(self, members: Iterable, universe: Iterable, m: int, k: int, m_c: int, k_c: int,
                 seed: int = 0):
        self.universe = {canonical(x) for x in universe}
        self.members = frozenset(canonical(x) for x in members)
        if not self.members <= self.universe:
            raise InputError("every member must belong to the universe")
        self.seed = seed
        self.m, self.k, self.m_c, self.k_c = m, k, m_c, k_c
        self.filter_s = StandardBF(m, k, seed)
        self.filter_c = StandardBF(m_c, k_c, seed, hashes=HashFamily(k_c, m_c, seed, b"complement"))
        complement = sorted(self.universe - self.members)
        self.filter_s.insert_many(sorted(self.members))
        self.filter_c.insert_many(complement)
        self.n = len(self.members)
        self.n_c = len(complement)
        self.oracle_lookups = 0

    def insert(self, item) -> None:
        raise CapabilityError(self.variant.name, "insertion after build")

    def joint_positive(self, item) -> bool:
        return self.filter_s.query(item).present and self.filter_c.query(item).present

    def query(self, item) -> QueryOutcome:
        key = canonical(item)
        if key not in self.universe:
            raise InputError(f"item {item!r} is outside the universe")
        if not self.filter_s.query(key).present:
            return ABSENT
        if not self.filter_c.query(key).present:
            return QueryOutcome(Verdict.PRESENT)
        self.oracle_lookups += 1
        if key in self.members:
            return QueryOutcome(Verdict.PRESENT, needs_oracle=True)
        return QueryOutcome(Verdict.ABSENT, needs_oracle=True)

    @property
    def size_bits(self) -> int:
        return self.m + self.m_c

    def params(self):
        return {"m": self.m, "k": self.k, "m_c": self.m_c, "k_c": self.k_c}

    def formula_params(self):
        return {"n": self.n, "n_c": self.n_c, "m": self.m, "k": self.k,
                "m_c": self.m_c, "k_c": self.k_c}
