"""Closed-form false-positive (and related) probabilities for every variant.

``analytic_fpp(tag, **params)`` evaluates one registered formula; the tags are
the members of :class:`FormulaId`.  Each formula validates its parameters and
the registry checks that the result is a probability.
"""

from __future__ import annotations

import enum
import inspect
import math
from typing import Callable, Sequence

from scipy import stats

from .errors import ParameterError


class FormulaId(str, enum.Enum):
    SBF_EQ2 = "SBF_Eq2"
    YESNO_EQ5 = "YesNo_Eq5"
    BH_EQ6 = "Bh_Eq6"
    VICBF_EQ8 = "VICBF_Eq8"
    FPCBF_EQ9 = "FPCBF_Eq9"
    RETOUCHED_FP = "Retouched_fP′"
    ACBF_OPT = "ACBF_opt"
    GBF_EQ14 = "GBF_Eq14"
    MCBF_EQ15 = "MCBF_Eq15"
    COMPLEMENT_EQ22 = "Complement_Eq22"
    SHBF_EQ23 = "ShBF_Eq23"
    DBF_EQ24 = "DBF_Eq24"
    WBF_EQ25 = "WBF_Eq25"
    DELETABLE_PD = "Deletable_pd"
    CUCKOO_EQ30 = "Cuckoo_Eq30"
    PBF_RANGE = "PBF_range"
    HDBF_FPP = "HDBF_fpp"

    @classmethod
    def parse(cls, tag: "str | FormulaId") -> "FormulaId":
        if isinstance(tag, FormulaId):
            return tag
        for member in cls:
            if tag in (member.value, member.name) or tag == member.value.replace("′", "'"):
                return member
        raise ParameterError(f"unknown formula tag {tag!r}")


def _positive(**values):
    for name, v in values.items():
        if v is None or not v > 0:
            raise ParameterError(f"{name} must be positive, got {v!r}")


def _non_negative(**values):
    for name, v in values.items():
        if v is None or v < 0:
            raise ParameterError(f"{name} must be non-negative, got {v!r}")


def zero_bit_probability(m: float, k: int, n: float, exact: bool = False) -> float:
    """Probability that a given bit is still 0 after ``n`` insertions of ``k`` hashes."""
    if exact:
        return math.exp(k * n * math.log1p(-1.0 / m))
    return math.exp(-k * n / m)


def sbf(m: float, k: int, n: float, exact: bool = False) -> float:
    _positive(m=m, k=k)
    _non_negative(n=n)
    if exact and m < 2:
        raise ParameterError("exact form needs m >= 2")
    if n == 0:
        return 0.0
    return (1.0 - zero_bit_probability(m, k, n, exact)) ** k


def yes_no(p: float, q: float, k: int, k_prime: int, n: float, n_no: float | None = None) -> float:
    _positive(p=p, q=q, k=k, k_prime=k_prime)
    _non_negative(n=n)
    n_no = n if n_no is None else n_no
    yes = (1.0 - math.exp(-k * n / p)) ** k
    no = (1.0 - math.exp(-k_prime * n_no / q)) ** k_prime
    return yes * no


def bh_default_cap(m: float, k: int, n: float, tail: float = 1e-9) -> int:
    """Smallest summation cap whose binomial tail P(X > h) is below ``tail``."""
    trials = int(round(n * k))
    h = 0
    while h < trials and stats.binom.sf(h, trials, 1.0 / m) >= tail:
        h += 1
    return h


def bh_scheme(m: float, k: int, n: float, l: int, h: int | None = None) -> float:
    _positive(m=m, k=k, l=l)
    _non_negative(n=n)
    trials = int(round(n * k))
    if h is None:
        h = bh_default_cap(m, k, n)
    j = list(range(0, int(h) + 1))
    pmf = stats.binom.pmf(j, trials, 1.0 / m)
    total = sum(float(pj) * (1.0 - 1.0 / l) ** jj for jj, pj in zip(j, pmf))
    return max(0.0, 1.0 - total) ** k


def vi_cbf(m: float, k: int, n: float, L: int) -> float:
    _positive(m=m, k=k, L=L)
    _non_negative(n=n)
    nk = n * k
    q = 1.0 - 1.0 / m
    t0 = q ** nk
    t1 = (L - 1) / L * nk * (1.0 / m) * q ** (nk - 1)
    t2 = (L - 1) * (L + 1) / (6.0 * L * L) * (nk * (nk - 1) / 2.0) * (1.0 / m) ** 2 * q ** (nk - 2)
    return max(0.0, 1.0 - t0 - t1 - t2) ** k


def fp_cbf(m_prime: float, k: int, n: float, f: int) -> float:
    _positive(m_prime=m_prime, k=k, f=f)
    _non_negative(n=n)
    if m_prime <= 1:
        raise ParameterError("m_prime must exceed 1 cell")
    kn = k * n
    q = 1.0 - 1.0 / m_prime
    single = (2.0 ** f - 1.0) / 2.0 ** f * (1.0 / m_prime) * kn * q ** (kn - 1)
    return max(0.0, 1.0 - q ** kn - single) ** k


def fp_cbf_budget_cells(m: int, c: int, f: int) -> float:
    """Cells an FP-CBF affords under the bit budget of ``m`` plain ``c``-bit counters."""
    _positive(m=m, c=c, f=f)
    return m * c / (c + f)


def retouched(f_p: float, p1: float, m: float, k: int, cleared: int = 1) -> float:
    """False-positive rate after clearing ``cleared`` random set bits."""
    _positive(m=m, k=k, p1=p1)
    _non_negative(f_p=f_p, cleared=cleared)
    d1 = (1.0 - 1.0 / (p1 * m)) ** k
    return f_p * d1 ** cleared


def retouched_fn(p1: float, m: float, k: int, cleared: int = 1) -> float:
    """Probability that a member becomes a false negative (Delta = 1 - d1)."""
    _positive(m=m, k=k, p1=p1)
    return 1.0 - (1.0 - 1.0 / (p1 * m)) ** (k * cleared)


def acbf_first_level(m: int, k: int, n: int) -> int:
    size = 4 * m - k * n
    if size < 1:
        raise ParameterError("4m - kn must be positive")
    return size


def acbf(m: float, k: int, n: float, s1: float | None = None, exact: bool = True) -> float:
    """First-level false-positive rate; ``s1`` defaults to the optimum 4m - kn."""
    _positive(m=m, k=k)
    _non_negative(n=n)
    if s1 is None:
        s1 = 4 * m - k * n
    if s1 <= 1:
        raise ParameterError("first level must hold more than one bit")
    return sbf(s1, k, n, exact=exact)


def gbf_bit_probabilities(m: float, k1: int, k2: int) -> tuple[float, float]:
    """Per-insertion probabilities that a bit is reset (q1) and set (q2)."""
    _positive(m=m)
    _non_negative(k1=k1, k2=k2)
    stay = 1.0 - 1.0 / m
    q1 = 1.0 - stay ** k1
    q2 = (1.0 - stay ** k2) * stay ** k1
    return q1, q2


def gbf_zero_probability(m: float, k1: int, k2: int, n: float, p0: float = 1.0) -> float:
    q1, q2 = gbf_bit_probabilities(m, k1, k2)
    keep = 1.0 - q1 - q2
    if q1 + q2 == 0:
        return p0
    return p0 * keep ** n + q1 / (q1 + q2) * (1.0 - keep ** n)


def gbf(m: float, k1: int, k2: int, n: float, p0: float = 1.0) -> float:
    _positive(m=m)
    _non_negative(n=n, k1=k1, k2=k2)
    if not 0 <= p0 <= 1:
        raise ParameterError("p0 must be a probability")
    q1, q2 = gbf_bit_probabilities(m, k1, k2)
    p = gbf_zero_probability(m, k1, k2, n, p0)
    return p ** (m * q1) * (1.0 - p) ** (m * q2)


def multi_class(m: float, k_e: int, load: float | None = None,
                presence: Sequence[float] | None = None,
                hash_counts: Sequence[int] | None = None) -> float:
    _positive(m=m, k_e=k_e)
    if load is None:
        if presence is None or hash_counts is None or len(presence) != len(hash_counts):
            raise ParameterError("give load or equal-length presence and hash_counts")
        load = sum(p * h for p, h in zip(presence, hash_counts))
    _non_negative(load=load)
    return (1.0 - (1.0 - 1.0 / m) ** load) ** k_e


def complement(n: int, n_c: int, m: float, k: int, m_c: float, k_c: int) -> float:
    _non_negative(n=n, n_c=n_c)
    total = n + n_c
    if total == 0:
        raise ParameterError("universe is empty")
    f = sbf(m, k, n, exact=True)
    f_c = sbf(m_c, k_c, n_c, exact=True)
    return n_c / total * f + n / total * f_c


def shifting(m: float, k: int, n: float, w_bar: int) -> float:
    _positive(m=m, k=k)
    _non_negative(n=n)
    if w_bar < 2:
        raise ParameterError("w_bar must be >= 2")
    if n == 0:
        return 0.0
    p = math.exp(-n * k / m)
    half = k / 2.0
    return (1.0 - p) ** half * (1.0 - p + p * p / (w_bar - 1)) ** half


def dynamic(m: float, k: int, C: int, N: int) -> float:
    _positive(m=m, k=k, C=C)
    _non_negative(N=N)
    if N <= C:
        return sbf(m, k, N)
    full = N // C
    last = N - C * full
    f_full = sbf(m, k, C)
    f_last = sbf(m, k, last)
    return 1.0 - (1.0 - f_full) ** full * (1.0 - f_last)


def weighted(r: Sequence[float], k: Sequence[int], p: float | None = None,
             m: float | None = None, total_hashes: float | None = None) -> float:
    if len(r) != len(k):
        raise ParameterError("r and k must have equal length")
    if p is None:
        _positive(m=m)
        _non_negative(total_hashes=total_hashes)
        p = math.exp(-total_hashes / m)
    if not 0 <= p <= 1:
        raise ParameterError("p must be a probability")
    return sum(re * (1.0 - p) ** ke for re, ke in zip(r, k))


def deletable(m: float, k: int, n: float, r: int, form: str = "corrected") -> float:
    """Probability that a member can be deleted (at least one bit in a collision-free region).

    ``form="literal"`` returns the complementary quantity, the probability
    that every bit of the member lies in a collided region.
    """
    _positive(m=m, k=k, r=r)
    _non_negative(n=n)
    kn = k * n
    stay = 1.0 - 1.0 / m
    p0 = stay ** kn
    p1 = kn / m * stay ** (kn - 1) if kn else 0.0
    pc = max(0.0, 1.0 - p0 - p1)
    clean_region = (1.0 - pc) ** (m / r)
    if form == "literal":
        return (1.0 - clean_region) ** k
    if form == "corrected":
        return 1.0 - (1.0 - clean_region) ** k
    raise ParameterError(f"unknown form {form!r}")


def cuckoo(f: int, b: int, alpha: float = 1.0, candidates: int = 2) -> float:
    """Fingerprint-collision false-positive rate of a bucketized fingerprint table.

    A negative query inspects ``candidates * b`` slots of which a fraction
    ``alpha`` is occupied; each occupied slot matches with probability 2**-f.
    """
    _positive(f=f, b=b, candidates=candidates)
    if not 0 <= alpha <= 1:
        raise ParameterError("alpha must be a load factor in [0, 1]")
    return 1.0 - (1.0 - 2.0 ** -f) ** (candidates * b * alpha)


def cuckoo_space_cost(f: int, alpha: float) -> float:
    """Bits per stored item, f / alpha."""
    _positive(f=f, alpha=alpha)
    return f / alpha


def persistent_range(slots: int, eps: float | None = None, m: float | None = None,
                     k: int | None = None, n: float | None = None) -> float:
    _positive(slots=slots)
    if eps is None:
        eps = sbf(m, k, n)
    if not 0 <= eps <= 1:
        raise ParameterError("eps must be a probability")
    return 1.0 - (1.0 - eps) ** slots


def high_dimensional(m: float, k: int, n: float) -> float:
    return sbf(m, k, n)


_REGISTRY: dict[FormulaId, Callable[..., float]] = {
    FormulaId.SBF_EQ2: sbf,
    FormulaId.YESNO_EQ5: yes_no,
    FormulaId.BH_EQ6: bh_scheme,
    FormulaId.VICBF_EQ8: vi_cbf,
    FormulaId.FPCBF_EQ9: fp_cbf,
    FormulaId.RETOUCHED_FP: retouched,
    FormulaId.ACBF_OPT: acbf,
    FormulaId.GBF_EQ14: gbf,
    FormulaId.MCBF_EQ15: multi_class,
    FormulaId.COMPLEMENT_EQ22: complement,
    FormulaId.SHBF_EQ23: shifting,
    FormulaId.DBF_EQ24: dynamic,
    FormulaId.WBF_EQ25: weighted,
    FormulaId.DELETABLE_PD: deletable,
    FormulaId.CUCKOO_EQ30: cuckoo,
    FormulaId.PBF_RANGE: persistent_range,
    FormulaId.HDBF_FPP: high_dimensional,
}


def formula_function(tag) -> Callable[..., float]:
    return _REGISTRY[FormulaId.parse(tag)]


def analytic_fpp(tag, **params) -> float:
    """Evaluate the formula registered under ``tag`` with keyword ``params``."""
    fn = formula_function(tag)
    try:
        inspect.signature(fn).bind(**params)
    except TypeError as exc:
        raise ParameterError(f"{FormulaId.parse(tag).value}: {exc}") from None
    value = fn(**params)
    assert 0.0 <= value <= 1.0 + 1e-12, f"{tag} produced {value} outside [0, 1]"
    return min(1.0, value)
