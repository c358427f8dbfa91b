"""Bloom-filter variants behind one membership interface.

Every filter exposes ``insert``, ``query`` (returning a :class:`QueryOutcome`),
and, where its :class:`Capabilities` allow, ``remove`` and ``count_estimate``.
``predicted_fpp()`` evaluates the matching closed-form false-positive formula
for the filter's current load.
"""

from .api import (ABSENT, MAYBE, Capabilities, FilterDescriptor, MembershipFilter, QueryOutcome,
                  Removal, ResultKind, Variant, Verdict, capabilities, outcome)
from .bitarrays import BitVector, CounterVector
from .classic import AdaptiveBF, CountingBF, SpectralBF, StandardBF
from .compute import OHBF, UFBF, ohbf_partition_sizes, ufbf_locate
from .dynamic import IBLT, DynamicBF, ShiftingBF, WeightedBF, wbf_allocate, wbf_objective
from .errors import (BloomError, CapabilityError, FilterFullError, FormatError, InputError,
                     ParameterError)
from .formulas import FormulaId, analytic_fpp
from .fpp_variants import (ACBF, FPCBF, VICBF, ComplementBF, GeneralizedBF, MultiClassBF,
                           RetouchedBF, YesNoBF, sigma_ratio, vicbf_cell_check)
from .hashing import (HashFamily, ScriptedHashFamily, canonical, fingerprint, hash_indices,
                      offset_of, vector_hash)
from .registry import capability_matrix, create
from .space import BFAH, CompactedBF, DlCBF, MatrixBF, compact, reconstruct
from .special import HDBF, CuckooFilter, DeletableBF, DistanceSensitiveBF, PersistentBF

__version__ = "0.1.0"

__all__ = [
    "ABSENT", "MAYBE", "Capabilities", "FilterDescriptor", "MembershipFilter", "QueryOutcome",
    "Removal", "ResultKind", "Variant", "Verdict", "capabilities", "outcome",
    "BitVector", "CounterVector",
    "AdaptiveBF", "CountingBF", "SpectralBF", "StandardBF",
    "OHBF", "UFBF", "ohbf_partition_sizes", "ufbf_locate",
    "IBLT", "DynamicBF", "ShiftingBF", "WeightedBF", "wbf_allocate", "wbf_objective",
    "BloomError", "CapabilityError", "FilterFullError", "FormatError", "InputError", "ParameterError",
    "FormulaId", "analytic_fpp",
    "ACBF", "FPCBF", "VICBF", "ComplementBF", "GeneralizedBF", "MultiClassBF", "RetouchedBF",
    "YesNoBF", "sigma_ratio", "vicbf_cell_check",
    "HashFamily", "ScriptedHashFamily", "canonical", "fingerprint", "hash_indices", "offset_of",
    "vector_hash",
    "capability_matrix", "create",
    "BFAH", "CompactedBF", "DlCBF", "MatrixBF", "compact", "reconstruct",
    "HDBF", "CuckooFilter", "DeletableBF", "DistanceSensitiveBF", "PersistentBF",
]
