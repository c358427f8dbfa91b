from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bfsketch import AdaptiveBF, CountingBF, SpectralBF, StandardBF, analytic_fpp
from bfsketch.analysis import distinct_members, empirical_fpp, generate_stream
from bfsketch.errors import ParameterError
from bfsketch.hashing import ScriptedHashFamily


class TestStandardBF:
    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            StandardBF(1, 3)
        with pytest.raises(ParameterError):
            StandardBF(10, 0)

    def test_insert_many_equals_insert(self):
        a, b = StandardBF(2048, 5, seed=3), StandardBF(2048, 5, seed=3)
        xs = distinct_members(200, 1)
        a.insert_many(xs)
        for x in xs:
            b.insert(x)
        assert (a.bits.bits == b.bits.bits).all() and a.n == b.n == 200

    def test_query_many_matches_query(self):
        f = StandardBF(1024, 4, seed=1)
        for x in range(100):
            f.insert(x)
        probes = list(range(50, 400))
        assert f.query_many(probes) == [f.query(x).present for x in probes]

    def test_predicted_fpp_tracks_n(self):
        f = StandardBF(65536, 8)
        f.insert_many(distinct_members(4096, 2))
        assert f.predicted_fpp() == pytest.approx(5.75e-4, rel=2e-3)

    def test_measured_near_formula(self):
        f = StandardBF(16384, 6, seed=5)
        members = distinct_members(1500, 5)
        f.insert_many(members)
        report = empirical_fpp(f, members, 200_000, seed=5)
        assert report.within(0.15)


class TestCountingBF:
    def test_saturation_is_sticky(self):
        stub = ScriptedHashFamily(2, 8, {"hot": [1, 2], "x": [1, 3]})
        f = CountingBF(8, 2, hashes=stub)
        for _ in range(20):
            f.insert("hot")
        assert f.counters[1] == 15 and f.stats()["saturation_events"] > 0
        f.insert("x")
        for _ in range(20):
            f.remove("hot")
        # counters that saturated are never decremented, so x is still present
        assert f.query("x").present
        assert f.counters[1] == 15

    def test_remove_unknown_is_not_found(self):
        f = CountingBF(64, 3)
        assert not f.remove("ghost")

    def test_four_bit_counters(self):
        assert CountingBF(64, 3).size_bits == 256

    def test_count_matches_oracle_without_collisions(self):
        # distinct positions for each item make the minimum counter exact
        script = {i: [3 * i, 3 * i + 1, 3 * i + 2] for i in range(10)}
        f = CountingBF(30, 3, hashes=ScriptedHashFamily(3, 30, script))
        stream = [i % 10 for i in range(37)]
        for x in stream:
            f.insert(x)
        truth = Counter(stream)
        assert all(f.count_estimate(x) == min(c, 15) for x, c in truth.items())


class TestSpectralBF:
    def test_all_minimum_case(self):
        f = SpectralBF(10, 3, hashes=ScriptedHashFamily(3, 10, {"x": [2, 5, 8]}))
        f.insert("x")
        assert [f.counters[i] for i in (2, 5, 8)] == [1, 1, 1]

    def test_unique_minimum(self):
        f = SpectralBF(10, 3, hashes=ScriptedHashFamily(3, 10, {"x": [2, 5, 8]}))
        f.counters.counts[[2, 5, 8]] = [1, 3, 2]
        f.insert("x")
        assert [f.counters[i] for i in (2, 5, 8)] == [2, 3, 2]

    def test_mode_validation(self):
        with pytest.raises(ParameterError):
            SpectralBF(10, 2, mode="other")

    def test_minimum_increase_never_above_plain(self):
        stream = generate_stream("zipf", 10_000, 2000, seed=4, s=1.1)
        mi = SpectralBF(4096, 4, seed=8, width=16, mode="minimum_increase")
        plain = CountingBF(4096, 4, seed=8, width=16)
        for x in stream:
            mi.insert(x)
            plain.insert(x)
        truth = Counter(stream)
        for x, c in truth.items():
            est = mi.count_estimate(x)
            assert c <= est <= plain.count_estimate(x)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(0, 40), max_size=80))
    def test_one_sided_error(self, stream):
        f = SpectralBF(64, 3, seed=2)
        for x in stream:
            f.insert(x)
        for x, c in Counter(stream).items():
            assert f.count_estimate(x) >= c

    def test_plain_mode_deletion_restores(self):
        f = SpectralBF(256, 3, seed=1, mode="plain")
        before = f.counters.counts.copy()
        for x in range(20):
            f.insert(x)
        for x in range(20):
            assert f.remove(x)
        assert (f.counters.counts == before).all()


class TestAdaptiveBF:
    def stub(self):
        script = {"x": [0, 1, 10, 11, 12, 13], "y": [2, 3, 20, 21, 22, 23]}
        return ScriptedHashFamily(6, 32, script)

    def test_fresh_filter(self):
        f = AdaptiveBF(32, 2, max_probe=4, hashes=self.stub())
        assert not f.query("x").present and f.count_estimate("x") == 0

    def test_single_insert_counts_one(self):
        f = AdaptiveBF(32, 2, max_probe=4, hashes=self.stub())
        f.insert("x")
        assert f.count_estimate("x") == 1
        assert f.query("x").frequency == 1

    def test_three_inserts_count_three(self):
        f = AdaptiveBF(32, 2, max_probe=4, hashes=self.stub())
        for _ in range(3):
            f.insert("x")
        assert f.count_estimate("x") == 3

    def test_count_capped_at_max_probe(self):
        f = AdaptiveBF(32, 2, max_probe=4, hashes=self.stub())
        for _ in range(9):
            f.insert("x")
        assert f.count_estimate("x") == 4

    def test_family_size_checked(self):
        with pytest.raises(ParameterError):
            AdaptiveBF(32, 2, max_probe=3, hashes=self.stub())

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(0, 10**6), max_size=50), st.integers(0, 10**6))
    def test_zero_base_bit_means_absent(self, xs, probe):
        f = AdaptiveBF(256, 3, seed=1)
        for x in xs:
            f.insert(x)
        base = f.family.indices(probe)[:3]
        if not all(f.bits.bits[i] for i in base):
            assert not f.query(probe).present

    def test_zipf_counts_track_frequency(self):
        stream = generate_stream("zipf", 3000, 500, seed=2)
        f = AdaptiveBF(1 << 15, 4, seed=3)
        for x in stream:
            f.insert(x)
        top = Counter(stream).most_common(1)[0][0]
        assert f.count_estimate(top) >= 10

    def test_formula_uses_effective_load(self):
        f = AdaptiveBF(1000, 4)
        f.n = 100
        assert f.predicted_fpp() == pytest.approx(analytic_fpp("SBF_Eq2", m=1000, k=4, n=125))
