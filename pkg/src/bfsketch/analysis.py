"""Empirical false-positive estimation, workload streams and equal-budget comparisons."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .api import MembershipFilter
from .errors import BloomError, ParameterError
from .hashing import canonical

REPORT_COLUMNS = ("variant", "m", "k", "n", "bits_per_element", "predicted_fpp", "measured_fpp",
                  "ci_lo", "ci_hi", "throughput", "seed")


@dataclass
class TrialReport:
    variant: str
    m: int | None
    k: int | None
    n: int
    bits_per_element: float | None
    predicted_fpp: float | None
    measured_fpp: float | None
    ci_lo: float | None
    ci_hi: float | None
    throughput: float | None
    seed: int
    n_probes: int = 0
    false_positives: int = 0
    error: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def ci_95(self) -> tuple[float | None, float | None]:
        return self.ci_lo, self.ci_hi

    def row(self) -> dict:
        d = asdict(self)
        return {c: d[c] for c in REPORT_COLUMNS}

    def within(self, tolerance: float) -> bool:
        """Measured rate within ``tolerance`` (relative) of the prediction."""
        if self.measured_fpp is None or not self.predicted_fpp:
            return False
        return abs(self.measured_fpp - self.predicted_fpp) <= tolerance * self.predicted_fpp


def binomial_ci(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Exact (Clopper-Pearson) confidence interval for a binomial proportion."""
    if trials <= 0:
        raise ParameterError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ParameterError("successes must be in [0, trials]")
    alpha = 1 - level
    lo = 0.0 if successes == 0 else float(stats.beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi


def random_probes(n_probes: int, seed: int, exclude: Iterable = ()) -> list[int]:
    """``n_probes`` distinct 64-bit integers whose canonical bytes avoid ``exclude``."""
    taken = {canonical(x) for x in exclude}
    rng = np.random.default_rng([seed, 0x9E3779B9])
    out: list[int] = []
    seen: set[int] = set()
    while len(out) < n_probes:
        batch = rng.integers(0, 2**64, size=max(16, n_probes - len(out)), dtype=np.uint64, endpoint=False)
        for v in batch.tolist():
            if v in seen or (taken and canonical(v) in taken):
                continue
            seen.add(v)
            out.append(v)
            if len(out) == n_probes:
                break
    return out


def _query_all(filt: MembershipFilter, probes: list) -> list[bool]:
    return [bool(x) for x in filt.query_many(probes)]


def empirical_fpp(filt: MembershipFilter, members: Iterable, n_probes: int, seed: int = 0,
                  probe_factory: Callable[[int, int], list] | None = None, timed: bool = False,
                  predicted: float | None = None, variant: str | None = None) -> TrialReport:
    """Measure the false-positive rate of an already-loaded filter.

    Probes are random 64-bit integers disjoint from ``members`` unless a
    ``probe_factory(n_probes, seed)`` is supplied (it must return non-members).
    """
    if n_probes <= 0:
        raise ParameterError("n_probes must be positive")
    members = list(members)
    probes = probe_factory(n_probes, seed) if probe_factory else random_probes(n_probes, seed, members)
    start = time.perf_counter()
    answers = _query_all(filt, probes)
    elapsed = time.perf_counter() - start
    fp = int(sum(answers))
    lo, hi = binomial_ci(fp, n_probes)
    if predicted is None:
        try:
            predicted = filt.predicted_fpp()
        except (BloomError, NotImplementedError, TypeError):
            predicted = None
    n = int(getattr(filt, "n", len(members)))
    m = getattr(filt, "m", None)
    k = getattr(filt, "k", None)
    try:
        bpe = filt.size_bits / n if n else None
    except NotImplementedError:
        bpe = None
    return TrialReport(
        variant=variant or filt.variant.name.lower(),
        m=int(m) if m is not None else None,
        k=int(k) if isinstance(k, (int, np.integer)) else None,
        n=n,
        bits_per_element=bpe,
        predicted_fpp=predicted,
        measured_fpp=fp / n_probes,
        ci_lo=lo,
        ci_hi=hi,
        throughput=(n_probes / elapsed if elapsed > 0 else None) if timed else None,
        seed=seed,
        n_probes=n_probes,
        false_positives=fp,
    )


def measure_throughput(filt: MembershipFilter, items: Sequence, operation: str = "query") -> float:
    """Operations per second for ``insert`` or ``query`` over ``items``."""
    if not items:
        raise ParameterError("need at least one item")
    start = time.perf_counter()
    if operation == "insert":
        for x in items:
            filt.insert(x)
    elif operation == "query":
        filt.query_many(items)
    else:
        raise ParameterError("operation must be 'insert' or 'query'")
    elapsed = time.perf_counter() - start
    return len(items) / elapsed if elapsed > 0 else float("inf")


def generate_stream(dist: str, n: int, universe: int, seed: int = 0, s: float = 1.0,
                    unique: bool = False) -> list[int]:
    """Deterministic workload of ``n`` integer items drawn from ``range(universe)``.

    ``uniform`` draws uniformly (without replacement when ``unique``);
    ``zipf`` draws item ``r - 1`` with probability proportional to ``r**-s``.
    """
    if n < 0 or universe < 1:
        raise ParameterError("n must be >= 0 and universe >= 1")
    rng = np.random.default_rng(seed)
    if n == 0:
        return []
    if dist == "uniform":
        if unique:
            if universe < n:
                raise ParameterError("unique mode needs universe >= n")
            return rng.choice(universe, size=n, replace=False).tolist()
        return rng.integers(0, universe, size=n).tolist()
    if dist == "zipf":
        if not s > 0:
            raise ParameterError("zipf exponent must be positive")
        if unique:
            raise ParameterError("unique mode applies to uniform streams only")
        weights = np.arange(1, universe + 1, dtype=float) ** -s
        return rng.choice(universe, size=n, p=weights / weights.sum()).tolist()
    raise ParameterError(f"unknown distribution {dist!r}")


def distinct_members(n: int, seed: int) -> list[int]:
    """``n`` distinct random 64-bit integers used as a member set."""
    return random_probes(n, seed ^ 0x5BD1E995)


def compare_budget(variants: Sequence[str], bits_per_element: Sequence[float], n: int,
                   seed: int = 0, n_probes: int = 100_000, timed: bool = False) -> list[TrialReport]:
    """One report per (variant, budget), all loaded with the same member stream and probes.

    A variant that cannot be sized for a budget yields a report carrying
    ``error`` instead of aborting the run.
    """
    from .registry import build_for_budget

    if not variants or not bits_per_element:
        raise ParameterError("need at least one variant and one budget")
    members = distinct_members(n, seed)
    probes = random_probes(n_probes, seed, members)
    reports = []
    for name in variants:
        for bpe in bits_per_element:
            try:
                filt = build_for_budget(name, bpe, n, seed)
                for x in members:
                    filt.insert(x)
                rep = empirical_fpp(filt, members, n_probes, seed, probe_factory=lambda _n, _s: probes,
                                    timed=timed, variant=name)
                rep.bits_per_element = filt.size_bits / n
            except BloomError as exc:
                rep = TrialReport(name, None, None, n, bpe, None, None, None, None, None, seed,
                                  error=str(exc))
            reports.append(rep)
    return reports
