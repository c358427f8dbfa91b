"""Shared builders: one small, loaded instance of every variant."""

from __future__ import annotations

import numpy as np
import pytest

from bfsketch import (ACBF, BFAH, FPCBF, HDBF, IBLT, OHBF, UFBF, VICBF, AdaptiveBF, CountingBF,
                      CuckooFilter, DeletableBF, DistanceSensitiveBF, DlCBF, DynamicBF,
                      GeneralizedBF, MultiClassBF, PersistentBF, RetouchedBF, ShiftingBF,
                      SpectralBF, StandardBF, WeightedBF, YesNoBF, compact)
from bfsketch.analysis import distinct_members


class Loaded:
    """A filter, the items inserted into it and a way to query any item."""

    def __init__(self, filt, members, query=None, probe=None):
        self.filt = filt
        self.members = members
        self.query = query or (lambda f, x: f.query(x).present)
        self.probe = probe or (lambda n, seed: distinct_members(n, seed + 1000))


def _ints(n, seed):
    return distinct_members(n, seed)


def _plain(filt, n, seed, insert=None):
    members = _ints(n, seed)
    for x in members:
        (insert or filt.insert)(x)
    return Loaded(filt, members)


def build_standard(n=300, seed=1):
    return _plain(StandardBF(4096, 4, seed), n, seed)


def build_counting(n=300, seed=1):
    return _plain(CountingBF(4096, 4, seed), n, seed)


def build_spectral(n=300, seed=1):
    return _plain(SpectralBF(4096, 4, seed), n, seed)


def build_adaptive(n=300, seed=1):
    return _plain(AdaptiveBF(4096, 4, seed), n, seed)


def build_vicbf(n=300, seed=1):
    return _plain(VICBF(2048, 3, seed), n, seed)


def build_fpcbf(n=300, seed=1):
    return _plain(FPCBF(2048, 3, seed), n, seed)


def build_acbf(n=300, seed=1):
    return _plain(ACBF(1024, 3, 300, seed), n, seed)


def build_multiclass(n=300, seed=1):
    def label(x):
        return "ab"[int(x) % 2]

    filt = MultiClassBF(4096, {"a": 2, "b": 5}, seed, classifier=label)
    loaded = _plain(filt, n, seed)
    # the classifier is not part of the saved state, so name the class explicitly
    loaded.query = lambda f, x: f.query(x, label(x)).present
    return loaded


def build_dlcbf(n=300, seed=1):
    return _plain(DlCBF(d=4, buckets=64, w=8, r=12, seed=seed), n, seed)


def build_bfah(n=300, seed=1):
    return _plain(BFAH(4096, 4, seed), n, seed)


def build_ohbf(n=300, seed=1):
    return _plain(OHBF(4096, 4, seed), n, seed)


def build_ufbf(n=300, seed=1):
    return _plain(UFBF(16, seed=seed), n, seed)


def build_dynamic(n=300, seed=1):
    return _plain(DynamicBF(1024, 3, 100, seed), n, seed)


def build_weighted(n=300, seed=1):
    return _plain(WeightedBF(4096, 4, 8, seed), n, seed)


def build_iblt(n=300, seed=1):
    filt = IBLT(1200, 4, seed)
    return _plain(filt, n, seed, insert=lambda x: filt.insert(x, x ^ 0xABCDEF))


def build_shifting(n=300, seed=1):
    return _plain(ShiftingBF(4096, 4, 64, seed), n, seed)


def build_deletable(n=300, seed=1):
    return _plain(DeletableBF(4096, 4, 64, seed), n, seed)


def build_cuckoo(n=300, seed=1):
    return _plain(CuckooFilter(128, 4, 12, seed=seed), n, seed)


def build_persistent(n=300, seed=1):
    filt = PersistentBF(2048, 3, granularity=10.0, seed=seed)
    members = _ints(n, seed)
    for i, x in enumerate(members):
        filt.insert(x, t=float(i % 50))
    return Loaded(filt, members)


def build_hdbf(n=300, seed=1):
    rng = np.random.default_rng(seed)
    filt = HDBF(4096, 3, q=32, seed=seed, lo=0.0, hi=1.0)
    members = [rng.random(4) for _ in range(n)]
    for v in members:
        filt.insert(v)

    def probe(count, s):
        r = np.random.default_rng(s + 7)
        return [r.random(4) for _ in range(count)]

    return Loaded(filt, members, probe=probe)


def build_yes_no(n=300, seed=1):
    return _plain(YesNoBF(4096, 64, 4, 4, 2, seed), n, seed)


def build_retouched(n=300, seed=1):
    return _plain(RetouchedBF(4096, 4, seed), n, seed)


def build_generalized(n=300, seed=1):
    return _plain(GeneralizedBF(4096, 2, 4, seed), n, seed)


def build_compacted(n=100, seed=1):
    base = _plain(StandardBF(2048, 3, seed), n, seed)
    return Loaded(compact(base.filt, 8, 6, seed), base.members)


def build_distance_sensitive(n=100, seed=1):
    rng = np.random.default_rng(seed)
    filt = DistanceSensitiveBF(64, 0, 20, n, seed)
    members = list(rng.integers(0, 2, size=(n, 64), dtype=np.uint8))
    for v in members:
        filt.insert(v)

    def probe(count, s):
        return list(np.random.default_rng(s + 9).integers(0, 2, size=(count, 64), dtype=np.uint8))

    return Loaded(filt, members, probe=probe)


# variants without false negatives in the capability matrix
NO_FN_BUILDERS = {
    "standard": build_standard, "counting": build_counting, "spectral": build_spectral,
    "adaptive": build_adaptive, "vi-cbf": build_vicbf, "fp-cbf": build_fpcbf, "acbf": build_acbf,
    "multi-class": build_multiclass, "dlcbf": build_dlcbf, "bfah": build_bfah, "ohbf": build_ohbf,
    "ufbf": build_ufbf, "dynamic": build_dynamic, "weighted": build_weighted, "iblt": build_iblt,
    "shifting": build_shifting, "deletable": build_deletable, "cuckoo": build_cuckoo,
    "persistent": build_persistent, "hdbf": build_hdbf,
}

# every variant that supports save/load
SERIALIZABLE_BUILDERS = {
    **{k: v for k, v in NO_FN_BUILDERS.items() if k != "bfah"},
    "yes-no": build_yes_no, "retouched": build_retouched, "generalized": build_generalized,
    "compacted": build_compacted, "distance-sensitive": build_distance_sensitive,
}


@pytest.fixture(params=sorted(NO_FN_BUILDERS))
def no_fn_loaded(request):
    return request.param, NO_FN_BUILDERS[request.param]()
