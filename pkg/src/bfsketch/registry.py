"""Name lookup for every variant, the capability matrix and equal-budget constructors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .api import Capabilities, MembershipFilter, Variant
from .classic import AdaptiveBF, CountingBF, SpectralBF, StandardBF
from .compute import OHBF, UFBF
from .dynamic import IBLT, DynamicBF, ShiftingBF, WeightedBF
from .errors import CapabilityError, ParameterError
from .fpp_variants import (ACBF, FPCBF, VICBF, ComplementBF, GeneralizedBF, MultiClassBF,
                           RetouchedBF, YesNoBF)
from .space import BFAH, CompactedBF, DlCBF, MatrixBF
from .special import HDBF, CuckooFilter, DeletableBF, DistanceSensitiveBF, PersistentBF

VARIANTS: dict[str, type[MembershipFilter]] = {
    "standard": StandardBF,
    "counting": CountingBF,
    "spectral": SpectralBF,
    "adaptive": AdaptiveBF,
    "yes-no": YesNoBF,
    "vi-cbf": VICBF,
    "fp-cbf": FPCBF,
    "retouched": RetouchedBF,
    "acbf": ACBF,
    "generalized": GeneralizedBF,
    "multi-class": MultiClassBF,
    "complement": ComplementBF,
    "dlcbf": DlCBF,
    "bfah": BFAH,
    "matrix": MatrixBF,
    "compacted": CompactedBF,
    "ohbf": OHBF,
    "ufbf": UFBF,
    "dynamic": DynamicBF,
    "weighted": WeightedBF,
    "iblt": IBLT,
    "shifting": ShiftingBF,
    "deletable": DeletableBF,
    "distance-sensitive": DistanceSensitiveBF,
    "cuckoo": CuckooFilter,
    "persistent": PersistentBF,
    "hdbf": HDBF,
}

BY_TAG: dict[Variant, type[MembershipFilter]] = {cls.variant: cls for cls in VARIANTS.values()}


def variant_class(name: str | Variant) -> type[MembershipFilter]:
    if isinstance(name, Variant):
        return BY_TAG[name]
    key = str(name).lower().replace("_", "-")
    if key not in VARIANTS:
        raise ParameterError(f"unknown variant {name!r}; choose from {sorted(VARIANTS)}")
    return VARIANTS[key]


def create(name: str | Variant, seed: int = 0, **params) -> MembershipFilter:
    cls = variant_class(name)
    try:
        return cls(**params, seed=seed)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {cls.__name__}: {exc}") from None


@dataclass(frozen=True)
class MatrixRow:
    name: str
    trait: str
    counting: str
    deletion: str
    false_negatives: str
    result: str

    def as_tuple(self) -> tuple[str, str, str, str, str, str]:
        return (self.name, self.trait, self.counting, self.deletion, self.false_negatives, self.result)


# display name and a short description of what sets each variant apart
DISPLAY: dict[str, tuple[str, str]] = {
    "standard": ("Standard BF", "plain set membership"),
    "cuckoo": ("Cuckoo BF", "fingerprints in a cuckoo hash table"),
    "counting": ("Counting BF", "membership plus multiplicity"),
    "dynamic": ("Dynamic BF", "grows by adding sub-filters, supports removal"),
    "persistent": ("Persistent BF", "membership within a time range"),
    "spectral": ("Spectral BF", "frequency estimates via minimum increase"),
    "dlcbf": ("D-left Counting BF", "counting with d-left fingerprint placement"),
    "distance-sensitive": ("Distance-Sensitive BF", "is a member within a given distance"),
    "generalized": ("Generalized BF", "set and reset hash groups"),
    "hdbf": ("High-Dimensional BF", "real vectors hashed into counters"),
    "acbf": ("Accurate Counting BF", "counters stored across popcount-indexed levels"),
    "ohbf": ("One-Hashing BF", "single hash split over prime partitions"),
    "retouched": ("Retouched BF", "clears bits to trade false positives for false negatives"),
    "deletable": ("Deletable BF", "removal limited to collision-free regions"),
    "adaptive": ("Adaptive BF", "extra hash probes record multiplicity"),
    "weighted": ("Weighted BF", "hash count follows query and membership likelihood"),
    "iblt": ("IBLT", "key/value sums that can be listed back"),
    "vi-cbf": ("VI-CBF", "variable increments sharpen counting queries"),
    "shifting": ("Shifting BF", "offset bits carry association or multiplicity"),
    "yes-no": ("Yes-no BF", "second filter suppresses known false positives"),
    "fp-cbf": ("FP-CBF", "counting cells with XOR fingerprints"),
    "multi-class": ("Multi-Class BF", "hash count chosen per element class"),
    "complement": ("Complement BF", "filters for a set and its complement"),
    "bfah": ("BFAH", "one payload address chosen among the hash positions"),
    "matrix": ("Matrix BF", "one row per document for similarity"),
    "compacted": ("Compacted BF", "blocks folded into short indices"),
    "ufbf": ("Ultra-Fast BF", "one cache-line block per item"),
}

# rows of the published comparison table that have no implementation here
UNIMPLEMENTED_ROWS = ("Compressed BF", "Conscious BF", "The Bloomier Filter")


def _yes_no(flag: bool) -> str:
    return "Yes" if flag else "No"


def capability_row(name: str) -> MatrixRow:
    cls = variant_class(name)
    caps: Capabilities = cls.capabilities
    display, trait = DISPLAY[name]
    return MatrixRow(display, trait, _yes_no(caps.counting), _yes_no(caps.deletion), caps.fn_cell,
                     caps.result_kind.value)


def capability_matrix() -> list[MatrixRow]:
    """One row per implemented variant, in registry order."""
    return [capability_row(name) for name in VARIANTS]


def capability_footnote() -> str:
    return "Not implemented: " + ", ".join(UNIMPLEMENTED_ROWS) + "."


# equal-memory constructors: bits_per_element counts every stored bit, counters included


def _k_for(cells_per_item: float) -> int:
    return max(1, round(math.log(2) * cells_per_item))


def _build_standard(bpe, n, seed):
    m = max(2, round(bpe * n))
    return StandardBF(m, _k_for(m / n), seed)


def _build_counting(bpe, n, seed):
    m = max(2, round(bpe * n / 4))
    return CountingBF(m, _k_for(m / n), seed)


def _build_spectral(bpe, n, seed):
    m = max(2, round(bpe * n / 8))
    return SpectralBF(m, _k_for(m / n), seed, mode="plain")


def _build_vicbf(bpe, n, seed):
    # 3-bit count plus 5-bit sum per cell
    m = max(2, round(bpe * n / 8))
    return VICBF(m, max(1, round(1.5 * m / n)), seed)


def _build_fpcbf(bpe, n, seed):
    m = max(2, round(bpe * n / 12))
    return FPCBF(m, _k_for(m / n), seed, c=4, f=8)


def _build_ohbf(bpe, n, seed):
    total = max(4, round(bpe * n))
    return OHBF(total, _k_for(total / n), seed)


def _build_ufbf(bpe, n, seed):
    return UFBF.for_capacity(n, bpe, seed=seed)


def _build_shifting(bpe, n, seed):
    m = max(2, round(bpe * n) - 63)
    k = max(2, 2 * round(_k_for(m / n) / 2))
    return ShiftingBF(m, k, 64, seed)


def _build_cuckoo(bpe, n, seed):
    f = max(1, min(32, round(bpe * 0.95)))
    buckets = 1 << max(0, math.ceil(math.log2(n / (4 * 0.95))))
    return CuckooFilter(buckets, 4, f, seed=seed)


def _build_adaptive(bpe, n, seed):
    m = max(2, round(bpe * n))
    return AdaptiveBF(m, _k_for(m / n), seed)


def _build_deletable(bpe, n, seed):
    m = max(2, round(bpe * n * 0.95))
    return DeletableBF(m, _k_for(m / n), max(1, round(bpe * n) - m), seed)


BUDGET_BUILDERS: dict[str, Callable[[float, int, int], MembershipFilter]] = {
    "standard": _build_standard,
    "counting": _build_counting,
    "spectral": _build_spectral,
    "vi-cbf": _build_vicbf,
    "fp-cbf": _build_fpcbf,
    "ohbf": _build_ohbf,
    "ufbf": _build_ufbf,
    "shifting": _build_shifting,
    "cuckoo": _build_cuckoo,
    "adaptive": _build_adaptive,
    "deletable": _build_deletable,
}


def build_for_budget(name: str, bits_per_element: float, n: int, seed: int = 0) -> MembershipFilter:
    """A filter of ``name`` sized for ``n`` items at ``bits_per_element`` bits each."""
    key = str(name).lower().replace("_", "-")
    variant_class(key)
    if key not in BUDGET_BUILDERS:
        raise CapabilityError(key, "bits-per-element sizing")
    if n < 1 or bits_per_element <= 0:
        raise ParameterError("n and bits_per_element must be positive")
    return BUDGET_BUILDERS[key](bits_per_element, n, seed)
