from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bfsketch import (ABSENT, MAYBE, Capabilities, CountingBF, CuckooFilter, QueryOutcome, Removal,
                      ResultKind, RetouchedBF, SpectralBF, StandardBF, Variant, Verdict,
                      capabilities, outcome)
from bfsketch.errors import CapabilityError, ParameterError
from bfsketch.hashing import ScriptedHashFamily
from bfsketch.registry import VARIANTS

from conftest import NO_FN_BUILDERS

# worked example: m = 11, k = 3; x2's positions are our own choice, picked so
# bit 3 stays clear and x5 lands on already-set bits
WORKED = {"x1": [0, 5, 6], "x2": [4, 8, 9], "x3": [1, 7, 8], "x4": [0, 3, 4], "x5": [4, 7, 9]}


def worked_filter():
    f = StandardBF(11, 3, hashes=ScriptedHashFamily(3, 11, WORKED))
    for x in ("x1", "x2", "x3"):
        f.insert(x)
    return f


class TestWorkedExample:
    def test_first_insert_sets_positions(self):
        f = StandardBF(11, 3, hashes=ScriptedHashFamily(3, 11, WORKED))
        f.insert("x1")
        assert f.bits.set_positions().tolist() == [0, 5, 6]

    def test_x4_absent(self):
        assert worked_filter().query("x4") == ABSENT

    def test_x5_false_positive(self):
        out = worked_filter().query("x5")
        assert out.verdict is Verdict.PRESENT and out.maybe_false_positive

    def test_idempotent_insert(self):
        f = worked_filter()
        before = f.bits.bits.copy()
        f.insert("x1")
        assert (f.bits.bits == before).all()


class TestQueryOutcome:
    def test_absent_cannot_be_fp(self):
        with pytest.raises(ParameterError):
            QueryOutcome(Verdict.ABSENT, maybe_false_positive=True)

    def test_absent_frequency(self):
        with pytest.raises(ParameterError):
            QueryOutcome(Verdict.ABSENT, frequency=2)
        assert QueryOutcome(Verdict.ABSENT, frequency=0).frequency == 0

    def test_negative_frequency(self):
        with pytest.raises(ParameterError):
            QueryOutcome(Verdict.PRESENT, frequency=-1)

    def test_outcome_helper(self):
        assert outcome(False) is ABSENT
        assert outcome(True) is MAYBE
        assert outcome(True, frequency=3).frequency == 3
        assert outcome(False, frequency=0).frequency == 0
        assert bool(MAYBE) and not bool(ABSENT)

    def test_removal_truthiness(self):
        assert Removal.REMOVED
        assert not Removal.NOT_FOUND and not Removal.ABORTED and not Removal.NOT_DELETABLE


class TestCapabilities:
    def test_frequency_requires_counting(self):
        with pytest.raises(ParameterError):
            Capabilities(False, False, False, ResultKind.FREQUENCY)

    def test_counting_row(self):
        caps = capabilities(CountingBF(64, 2))
        assert (caps.counting, caps.deletion, caps.fn_cell) == (True, True, "/")
        assert "Frequency" in caps.result_kind.value

    def test_retouched_has_fn(self):
        assert capabilities(RetouchedBF).false_negatives_possible

    def test_cuckoo_row(self):
        caps = capabilities(CuckooFilter)
        assert (caps.counting, caps.deletion, caps.false_negatives_possible) == (False, True, False)

    def test_every_variant_has_distinct_tag(self):
        tags = [cls.variant for cls in VARIANTS.values()]
        assert len(tags) == len(set(tags)) == len(Variant)


class TestRemoveAndCount:
    def test_sbf_remove_is_capability_error(self):
        with pytest.raises(CapabilityError, match="deletion"):
            StandardBF(64, 2).remove("x")

    def test_sbf_count_is_capability_error(self):
        with pytest.raises(CapabilityError, match="counting"):
            StandardBF(64, 2).count_estimate("x")

    def test_cbf_insert_remove(self):
        f = CountingBF(1024, 4, seed=3)
        f.insert("x")
        assert f.remove("x") is Removal.REMOVED
        assert not f.query("x").present

    def test_cuckoo_remove_twice(self):
        f = CuckooFilter(16)
        f.insert("x")
        assert f.remove("x") is Removal.REMOVED
        assert not f.query("x").present
        assert f.remove("x") is Removal.NOT_FOUND

    def test_fresh_count_zero(self):
        assert CountingBF(64, 3).count_estimate("never") == 0

    def test_cbf_repeated_inserts(self):
        f = CountingBF(4096, 4, seed=1)
        for _ in range(5):
            f.insert("x")
        assert f.count_estimate("x") >= 5

    def test_spectral_overestimates(self):
        f = SpectralBF(256, 3, seed=2)
        for _ in range(3):
            f.insert("item")
        for x in range(100):
            f.insert(x)
        assert f.count_estimate("item") >= 3


class TestEmptyFilters:
    @pytest.mark.parametrize("name", sorted(NO_FN_BUILDERS))
    def test_empty_filter_reports_absent(self, name):
        loaded = NO_FN_BUILDERS[name](n=0)
        for probe in loaded.probe(50, 3):
            assert not loaded.query(loaded.filt, probe)


class TestNoFalseNegatives:
    def test_members_always_present(self, no_fn_loaded):
        name, loaded = no_fn_loaded
        missing = [x for x in loaded.members if not loaded.query(loaded.filt, x)]
        assert missing == [], name

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(0, 2**64 - 1), min_size=1, max_size=60, unique=True))
    def test_property_standard(self, xs):
        f = StandardBF(512, 3, seed=9)
        for x in xs:
            f.insert(x)
        assert all(f.query(x).present for x in xs)
        assert f.bits.popcount() <= f.k * f.n


class TestDeletionSoundness:
    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.booleans(), st.integers(0, 30)), max_size=120))
    def test_cbf_trace_against_multiset(self, ops):
        f = CountingBF(128, 3, seed=4)
        truth = Counter()
        for is_insert, x in ops:
            if is_insert:
                f.insert(x)
                truth[x] += 1
            elif truth[x] > 0:
                assert f.remove(x) is Removal.REMOVED
                truth[x] -= 1
            for y, c in truth.items():
                if c > 0:
                    assert f.query(y).present
                    assert f.count_estimate(y) >= c

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(0, 50), max_size=40))
    def test_cbf_insert_then_remove_restores_state(self, xs):
        f = CountingBF(256, 3, seed=6)
        f.insert(999)
        before = f.counters.counts.copy()
        for x in xs:
            f.insert(x)
        for x in reversed(xs):
            f.remove(x)
        assert (f.counters.counts == before).all()
