"""Variants that cut hashing cost: One-Hashing BF and Ultra-Fast BF."""

from __future__ import annotations

import math

import numpy as np

from .api import Capabilities, QueryOutcome, Variant, outcome
from .bitarrays import BitVector
from .classic import HashedFilter
from .errors import ParameterError
from .hashing import hash64, hash_digits


def _primes_between(lo: int, hi: int) -> list[int]:
    from sympy import primerange

    return list(primerange(max(2, lo), hi + 1))


def ohbf_partition_sizes(total_bits: int, k: int) -> list[int]:
    """``k`` distinct primes with the largest sum not exceeding ``total_bits``.

    The best window of ``k`` consecutive primes is chosen first, then its
    largest prime is raised to the biggest prime that still fits the budget.
    Returned in increasing order.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    if total_bits < 2 * k:
        raise ParameterError(f"total_bits={total_bits} is below 2k={2 * k}")
    centre = total_bits // k
    span = max(64, int(4 * k * math.log(max(total_bits, 3))))
    lo = max(2, centre - span)
    while True:
        primes = _primes_between(lo, min(total_bits, centre + span))
        best = None
        for start in range(len(primes) - k + 1):
            window = primes[start:start + k]
            s = sum(window)
            if s > total_bits:
                break
            best = window
        if best is not None and (best[0] != primes[0] or lo == 2):
            break
        if lo == 2:
            raise ParameterError(f"no set of {k} distinct primes fits in {total_bits} bits")
        lo = 2
    from sympy import prevprime

    room = total_bits - sum(best[:-1])
    top = max(best[-1], prevprime(room + 1))
    return best[:-1] + [top]


class OHBF(HashedFilter):
    """One-Hashing Bloom filter.

    The bit array is split into ``k`` partitions of distinct prime sizes
    ``m_i``; a single 64-bit hash ``H`` sets bit ``H mod m_i`` of each partition.
    """

    variant = Variant.ONE_HASHING
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=False)

    def __init__(self, total_bits: int, k: int, seed: int = 0):
        self.total_bits = total_bits
        self.k = k
        self.seed = seed
        self.moduli = ohbf_partition_sizes(total_bits, k)
        self.offsets = [0]
        for mi in self.moduli[:-1]:
            self.offsets.append(self.offsets[-1] + mi)
        self.m = sum(self.moduli)
        self.bits = BitVector(self.m)
        self.family = None
        self.n = 0
        self._mod = np.array(self.moduli, dtype=np.uint64)
        self._off = np.array(self.offsets, dtype=np.int64)

    @property
    def serializable(self) -> bool:
        return True

    def base_hash(self, item) -> int:
        return hash64(item, self.seed, b"ohbf")

    def indices(self, item) -> list[int]:
        h = self.base_hash(item)
        return [off + h % mi for off, mi in zip(self.offsets, self.moduli)]

    def insert(self, item) -> None:
        self.bits.bits[self.indices(item)] = 1
        self.n += 1

    def query(self, item) -> QueryOutcome:
        bits = self.bits.bits
        return outcome(all(bits[i] for i in self.indices(item)))

    def query_many(self, items) -> list[bool]:
        items = list(items)
        if not items:
            return []
        h = np.array([self.base_hash(x) for x in items], dtype=np.uint64)
        idx = (h[:, None] % self._mod[None, :]).astype(np.int64) + self._off[None, :]
        return self.bits.bits[idx].all(axis=1).tolist()

    @property
    def size_bits(self) -> int:
        return self.m

    def params(self):
        return {"total_bits": self.total_bits, "k": self.k}

    def formula_params(self):
        return {"m": self.m, "k": self.k, "n": self.n}

    def _arrays(self):
        return [(self.bits.bits, 1)]

    def _restore_arrays(self, arrays):
        self.bits = BitVector(self.m, arrays[0])


def ufbf_locate(item, l: int, k: int = 8, w: int = 64, seed: int = 0) -> tuple[int, list[int]]:
    """Block chosen by the selector hash and the bit offset inside each of the ``k`` words."""
    return UFBF(l, k, w, seed).locate(item)


class UFBF(HashedFilter):
    """Ultra-Fast Bloom filter: ``l`` blocks of ``k`` words of ``w`` bits.

    A selector hash picks one block; word ``i`` of that block receives one bit
    at offset ``h_i(x) mod w``.  With ``k * w = 512`` a block is one cache line.
    The offsets are independent digits of one digest: double hashing modulo a
    word size as small as 64 would tie all ``k`` offsets to one of only
    ``w * w / 2`` progressions and inflate the false-positive rate.
    """

    variant = Variant.ULTRA_FAST
    capabilities = Capabilities(counting=False, deletion=False, false_negatives_possible=False)

    def __init__(self, l: int, k: int = 8, w: int = 64, seed: int = 0):
        if l < 1:
            raise ParameterError("need at least one block")
        if k < 1 or w < 2:
            raise ParameterError("k must be >= 1 and w >= 2")
        self.l, self.k, self.w = l, k, w
        self.seed = seed
        if k * math.log2(w) > 448:
            raise ParameterError("k * log2(w) must not exceed 448 bits")
        self.family = None
        self.m = l * k * w
        self.bits = BitVector(self.m)
        self.n = 0

    @classmethod
    def for_capacity(cls, n: int, bits_per_element: float, k: int = 8, w: int = 64,
                     seed: int = 0) -> "UFBF":
        l = max(1, math.ceil(n * bits_per_element / (k * w)))
        return cls(l, k, w, seed)

    def locate(self, item) -> tuple[int, list[int]]:
        block = hash64(item, self.seed, b"block") % self.l
        return block, hash_digits(item, self.k, self.w, self.seed, b"word")

    def positions(self, item) -> list[int]:
        block, offsets = self.locate(item)
        base = block * self.k
        return [(base + i) * self.w + o for i, o in enumerate(offsets)]

    def touched_words(self, item) -> list[int]:
        block, _ = self.locate(item)
        return [block * self.k + i for i in range(self.k)]

    def hash_evaluations(self) -> int:
        """Logical hash functions evaluated per operation: the selector plus one per word."""
        return self.k + 1

    def blocked_fpp(self) -> float:
        """False-positive rate with the per-block load averaged over a Poisson distribution.

        The plain formula over ``m = l*k*w`` bits ignores that loads vary
        between blocks and so underestimates the rate of a blocked filter.
        """
        from scipy import stats

        lam = self.n / self.l
        loads = np.arange(0, int(lam + 12 * math.sqrt(lam + 1) + 20))
        fill = 1.0 - (1.0 - 1.0 / self.w) ** loads
        return float((stats.poisson.pmf(loads, lam) * fill ** self.k).sum())

    def insert(self, item) -> None:
        self.bits.bits[self.positions(item)] = 1
        self.n += 1

    def query(self, item) -> QueryOutcome:
        bits = self.bits.bits
        return outcome(all(bits[i] for i in self.positions(item)))

    @property
    def size_bits(self) -> int:
        return self.m

    def params(self):
        return {"l": self.l, "k": self.k, "w": self.w}

    def formula_params(self):
        return {"m": self.m, "k": self.k, "n": self.n}

    def _arrays(self):
        return [(self.bits.bits, 1)]

    def _restore_arrays(self, arrays):
        self.bits = BitVector(self.m, arrays[0])
