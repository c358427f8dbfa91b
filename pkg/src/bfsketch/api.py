"""The membership interface every variant implements."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, ClassVar

from .errors import CapabilityError, ParameterError


class Verdict(enum.Enum):
    ABSENT = "absent"
    PRESENT = "present"


class ResultKind(enum.Enum):
    BOOLEAN = "Boolean"
    FREQUENCY = "Frequency"
    BOOLEAN_FREQUENCY = "Boolean / Frequency"


class Removal(enum.Enum):
    REMOVED = "removed"
    NOT_FOUND = "not-found"
    ABORTED = "aborted"              # ambiguous owner (Dynamic BF)
    NOT_DELETABLE = "not-deletable"  # every bit lies in a collided region (Deletable BF)

    def __bool__(self):
        return self is Removal.REMOVED


@dataclass(frozen=True)
class Capabilities:
    """What a variant can do.

    ``fn_qualified`` marks variants that have no false negatives under correct
    usage (no deleting of non-members, no counter overflow), rendered as ``/``
    in the capability matrix.
    """

    counting: bool
    deletion: bool
    false_negatives_possible: bool
    result_kind: ResultKind = ResultKind.BOOLEAN
    fn_qualified: bool = False

    def __post_init__(self):
        if self.result_kind is ResultKind.FREQUENCY and not self.counting:
            raise ParameterError("a frequency-only result requires counting")
        if self.fn_qualified and self.false_negatives_possible:
            raise ParameterError("fn_qualified only applies to variants without false negatives")

    @property
    def fn_cell(self) -> str:
        if self.false_negatives_possible:
            return "Yes"
        return "/" if self.fn_qualified else "No"


@dataclass(frozen=True)
class QueryOutcome:
    verdict: Verdict
    maybe_false_positive: bool = False
    frequency: int | None = None
    auxiliary: Any = None
    needs_oracle: bool = False

    def __post_init__(self):
        if self.verdict is Verdict.ABSENT:
            if self.maybe_false_positive:
                raise ParameterError("an absent verdict cannot be a false positive")
            if self.frequency not in (None, 0):
                raise ParameterError("an absent verdict carries no frequency")
        if self.frequency is not None and self.frequency < 0:
            raise ParameterError("frequency must be non-negative")

    def __bool__(self):
        return self.verdict is Verdict.PRESENT

    @property
    def present(self) -> bool:
        return self.verdict is Verdict.PRESENT


ABSENT = QueryOutcome(Verdict.ABSENT)
MAYBE = QueryOutcome(Verdict.PRESENT, maybe_false_positive=True)


def outcome(present: bool, frequency: int | None = None, auxiliary: Any = None) -> QueryOutcome:
    if not present:
        return ABSENT if frequency is None and auxiliary is None else QueryOutcome(
            Verdict.ABSENT, frequency=None if frequency is None else 0, auxiliary=auxiliary)
    if frequency is None and auxiliary is None:
        return MAYBE
    return QueryOutcome(Verdict.PRESENT, True, frequency, auxiliary)


class Variant(enum.IntEnum):
    """Variant tags; the integer value is the serialized tag byte."""

    STANDARD = 1
    COUNTING = 2
    SPECTRAL = 3
    ADAPTIVE = 4
    YES_NO = 5
    VI_CBF = 6
    FP_CBF = 7
    RETOUCHED = 8
    ACCURATE_COUNTING = 9
    GENERALIZED = 10
    MULTI_CLASS = 11
    COMPLEMENT = 12
    D_LEFT = 13
    BFAH = 14
    MATRIX = 15
    COMPACTED = 16
    ONE_HASHING = 17
    ULTRA_FAST = 18
    DYNAMIC = 19
    WEIGHTED = 20
    IBLT = 21
    SHIFTING = 22
    DELETABLE = 23
    DISTANCE_SENSITIVE = 24
    CUCKOO = 25
    PERSISTENT = 26
    HIGH_DIMENSIONAL = 27


@dataclass
class FilterDescriptor:
    variant: Variant
    params: dict = field(default_factory=dict)
    seed: int = 0


class MembershipFilter:
    """Base class: approximate set membership with capability-checked extras.

    Subclasses set ``variant``, ``capabilities`` and ``formula`` and implement
    :meth:`insert` and :meth:`query`.  ``n`` counts insertions net of removals
    and feeds the analytic false-positive formulas.
    """

    variant: ClassVar[Variant]
    capabilities: ClassVar[Capabilities]
    formula: ClassVar[str] = "SBF_Eq2"

    n: int = 0
    seed: int = 0

    def insert(self, item) -> None:
        raise NotImplementedError

    def query(self, item) -> QueryOutcome:
        raise NotImplementedError

    def __contains__(self, item) -> bool:
        return self.query(item).present

    def remove(self, item) -> Removal:
        raise CapabilityError(self.variant.name, "deletion")

    def count_estimate(self, item) -> int:
        raise CapabilityError(self.variant.name, "counting")

    def query_many(self, items) -> list[bool]:
        return [self.query(item).present for item in items]

    @property
    def size_bits(self) -> int:
        """Memory footprint of the filter's arrays in bits."""
        raise NotImplementedError

    def formula_params(self) -> dict:
        return {}

    def predicted_fpp(self) -> float:
        from .formulas import analytic_fpp

        return analytic_fpp(self.formula, **self.formula_params())

    def params(self) -> dict:
        """Constructor parameters (excluding the seed)."""
        return {}

    def describe(self) -> FilterDescriptor:
        return FilterDescriptor(self.variant, self.params(), self.seed)

    # serialization hooks: arrays are (values, bit width) pairs, extra state is JSON
    serializable = True

    def _arrays(self) -> list:
        return []

    def _restore_arrays(self, arrays: list) -> None:
        pass

    def _extra_state(self) -> dict:
        return {"n": self.n}

    def _restore_extra(self, state: dict) -> None:
        self.n = int(state.get("n", 0))

    @classmethod
    def _from_state(cls, params: dict, seed: int, state: dict, arrays: list) -> "MembershipFilter":
        obj = cls(**params, seed=seed)
        obj._restore_arrays(arrays)
        obj._restore_extra(state)
        return obj

    def _require(self, capability: str) -> None:
        caps = self.capabilities
        ok = {"deletion": caps.deletion, "counting": caps.counting}[capability]
        if not ok:
            raise CapabilityError(self.variant.name, capability)


def capabilities(f: MembershipFilter | type) -> Capabilities:
    return f.capabilities
