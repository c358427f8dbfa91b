import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bfsketch import CountingBF, FormulaId, StandardBF, analytic_fpp
from bfsketch.analysis import (REPORT_COLUMNS, binomial_ci, compare_budget, distinct_members,
                               empirical_fpp, generate_stream, measure_throughput, random_probes)
from bfsketch.errors import ParameterError
from bfsketch.formulas import sbf
from bfsketch.registry import VARIANTS, build_for_budget

from conftest import SERIALIZABLE_BUILDERS


class TestAnalyticFormulas:
    def test_small_standard_both_forms(self):
        assert analytic_fpp("SBF_Eq2", m=11, k=3, n=3) == pytest.approx(0.1745, abs=5e-5)
        assert analytic_fpp("SBF_Eq2", m=11, k=3, n=3, exact=True) == pytest.approx(0.1910, abs=5e-5)

    def test_empty_set(self):
        assert analytic_fpp("SBF_Eq2", m=100, k=3, n=0) == 0

    def test_desk_config(self):
        assert analytic_fpp("SBF_Eq2", m=65536, k=8, n=4096) == pytest.approx(5.75e-4, rel=2e-3)

    def test_missing_parameter(self):
        with pytest.raises(ParameterError):
            analytic_fpp("SBF_Eq2", m=100, k=3)
        with pytest.raises(ParameterError):
            analytic_fpp("SBF_Eq2", m=-1, k=3, n=1)
        with pytest.raises(ParameterError):
            analytic_fpp("no-such-tag", m=1)

    def test_tags_parse_by_value_and_name(self):
        assert FormulaId.parse("Retouched_fP'") is FormulaId.RETOUCHED_FP
        assert FormulaId.parse("SBF_EQ2") is FormulaId.SBF_EQ2

    def test_every_variant_has_a_formula_tag(self):
        for cls in VARIANTS.values():
            if isinstance(cls.formula, str):
                FormulaId.parse(cls.formula)
        # some variants pick their tag per instance
        for build in SERIALIZABLE_BUILDERS.values():
            FormulaId.parse(build(n=5).filt.formula)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1001, 10**7), st.integers(1, 16), st.floats(0, 1))
    def test_approximation_gap(self, m, k, load):
        n = load * m / k * 0.999
        gap = abs(sbf(m, k, n) - sbf(m, k, n, exact=True))
        assert gap < 1e-3

    def test_complement_is_weighted_mixture(self):
        # the mixture of the two one-sided error rates, weighted by set sizes
        n, n_c, m, k, m_c, k_c = 300, 700, 4000, 4, 9000, 3
        f = sbf(m, k, n, exact=True)
        f_c = sbf(m_c, k_c, n_c, exact=True)
        value = analytic_fpp("Complement_Eq22", n=n, n_c=n_c, m=m, k=k, m_c=m_c, k_c=k_c)
        assert value == pytest.approx(0.7 * f + 0.3 * f_c)

    def test_bh_cap_tail(self):
        from bfsketch.formulas import bh_default_cap

        h = bh_default_cap(1000, 3, 300)
        assert stats.binom.sf(h, 900, 1e-3) < 1e-9 <= stats.binom.sf(h - 1, 900, 1e-3)


counts = st.integers(0, 5000)
small_k = st.integers(1, 12)
prob = st.floats(0, 1)


@st.composite
def formula_case(draw):
    tag = draw(st.sampled_from(list(FormulaId)))
    m = draw(st.integers(16, 10**6))
    k = draw(small_k)
    n = draw(counts)
    cases = {
        FormulaId.SBF_EQ2: dict(m=m, k=k, n=n, exact=draw(st.booleans())),
        FormulaId.YESNO_EQ5: dict(p=m, q=draw(st.integers(2, 4096)), k=k + 1, k_prime=k, n=n),
        FormulaId.BH_EQ6: dict(m=m, k=k, n=draw(st.integers(0, 300)), l=draw(st.integers(1, 8))),
        FormulaId.VICBF_EQ8: dict(m=m, k=k, n=n, L=draw(st.integers(1, 8))),
        FormulaId.FPCBF_EQ9: dict(m_prime=m, k=k, n=n, f=draw(st.integers(1, 16))),
        FormulaId.RETOUCHED_FP: dict(f_p=draw(prob), p1=draw(st.floats(0.05, 1)), m=m, k=k,
                                     cleared=draw(st.integers(0, 50))),
        FormulaId.ACBF_OPT: dict(m=m, k=k, n=draw(st.integers(0, m // k))),
        FormulaId.GBF_EQ14: dict(m=m, k1=k, k2=draw(small_k), n=n, p0=draw(prob)),
        FormulaId.MCBF_EQ15: dict(m=m, k_e=k, load=draw(st.floats(0, 1e5))),
        FormulaId.COMPLEMENT_EQ22: dict(n=n, n_c=n + 1, m=m, k=k, m_c=m, k_c=draw(small_k)),
        FormulaId.SHBF_EQ23: dict(m=m, k=k, n=n, w_bar=draw(st.integers(2, 128))),
        FormulaId.DBF_EQ24: dict(m=m, k=k, C=draw(st.integers(1, 1000)), N=n),
        FormulaId.WBF_EQ25: dict(r=[0.25, 0.75], k=[k, draw(small_k)], p=draw(prob)),
        FormulaId.DELETABLE_PD: dict(m=m, k=k, n=n, r=draw(st.integers(1, 64)),
                                     form=draw(st.sampled_from(["literal", "corrected"]))),
        FormulaId.CUCKOO_EQ30: dict(f=draw(st.integers(1, 32)), b=draw(st.integers(1, 8)),
                                    alpha=draw(prob)),
        FormulaId.PBF_RANGE: dict(slots=draw(st.integers(1, 100)), eps=draw(prob)),
        FormulaId.HDBF_FPP: dict(m=m, k=k, n=n),
    }
    return tag, cases[tag]


class TestFormulaDomain:
    @settings(max_examples=400, deadline=None)
    @given(formula_case())
    def test_value_is_probability(self, case):
        tag, params = case
        value = analytic_fpp(tag, **params)
        assert 0.0 <= value <= 1.0


class TestBinomialCI:
    def test_contains_estimate(self):
        lo, hi = binomial_ci(30, 1000)
        assert lo < 0.03 < hi

    def test_edges(self):
        assert binomial_ci(0, 100)[0] == 0.0
        assert binomial_ci(100, 100)[1] == 1.0

    def test_exact_against_scipy(self):
        lo, hi = binomial_ci(7, 500)
        ref = stats.binomtest(7, 500).proportion_ci(method="exact")
        assert (lo, hi) == pytest.approx((ref.low, ref.high))

    def test_invalid(self):
        with pytest.raises(ParameterError):
            binomial_ci(5, 0)


class TestEmpiricalFpp:
    def test_empty_filter(self):
        report = empirical_fpp(StandardBF(1024, 3), [], 5000, seed=1)
        assert report.measured_fpp == 0 and report.false_positives == 0

    def test_zero_probes(self):
        with pytest.raises(ParameterError):
            empirical_fpp(StandardBF(1024, 3), [], 0)

    def test_desk_config(self):
        f = StandardBF(65536, 8, seed=1)
        members = distinct_members(4096, 1)
        f.insert_many(members)
        report = empirical_fpp(f, members, 1_000_000, seed=1)
        assert report.within(0.15)
        assert report.ci_lo <= report.measured_fpp <= report.ci_hi

    def test_reproducible(self):
        def run():
            f = CountingBF(2048, 3, seed=4)
            members = distinct_members(300, 4)
            for x in members:
                f.insert(x)
            return empirical_fpp(f, members, 20_000, seed=4).row()

        assert run() == run()

    def test_probes_avoid_members(self):
        members = distinct_members(100, 2)
        assert not set(random_probes(10_000, 2, members)) & set(members)

    def test_row_columns(self):
        f = StandardBF(256, 2)
        assert tuple(empirical_fpp(f, [], 10).row()) == REPORT_COLUMNS

    def test_throughput(self):
        f = StandardBF(4096, 3)
        assert measure_throughput(f, list(range(1000)), "insert") > 0
        assert measure_throughput(f, list(range(1000)), "query") > 0
        with pytest.raises(ParameterError):
            measure_throughput(f, [1], "delete")


class TestStreams:
    def test_empty(self):
        assert generate_stream("uniform", 0, 10) == []

    def test_deterministic(self):
        assert generate_stream("zipf", 500, 100, seed=3) == generate_stream("zipf", 500, 100, seed=3)

    def test_zipf_rank_ratio(self):
        freq = Counter(generate_stream("zipf", 100_000, 10_000, seed=1, s=1.0))
        (_, first), (_, second) = freq.most_common(2)
        assert abs(first / second - 2.0) <= 0.1

    def test_unique_uniform(self):
        xs = generate_stream("uniform", 500, 600, seed=2, unique=True)
        assert len(set(xs)) == 500

    @pytest.mark.parametrize("kwargs", [dict(dist="zipf", s=0), dict(dist="other"),
                                        dict(dist="uniform", unique=True, universe=5)])
    def test_invalid(self, kwargs):
        args = dict(n=10, universe=100) | kwargs
        with pytest.raises(ParameterError):
            generate_stream(**args)


class TestCompareBudget:
    def test_single_cell_equals_direct_measurement(self):
        [cell] = compare_budget(["standard"], [10], 500, seed=3, n_probes=20_000)
        f = build_for_budget("standard", 10, 500, 3)
        members = distinct_members(500, 3)
        for x in members:
            f.insert(x)
        direct = empirical_fpp(f, members, 20_000, seed=3)
        assert cell.measured_fpp == direct.measured_fpp and cell.predicted_fpp == direct.predicted_fpp

    def test_vicbf_beats_counting(self):
        cbf, vi = compare_budget(["counting", "vi-cbf"], [16], 2000, seed=6, n_probes=100_000)
        assert vi.ci_hi < cbf.ci_lo

    def test_standard_monotone_in_budget(self):
        cells = compare_budget(["standard"], [8, 12, 16, 20], 2000, seed=2, n_probes=200_000)
        rates = [c.measured_fpp for c in cells]
        assert all(a >= b for a, b in zip(rates, rates[1:]))

    def test_unsupported_variant_is_error_cell(self):
        cells = compare_budget(["standard", "complement"], [10], 200, seed=1, n_probes=1000)
        assert cells[0].error is None and cells[1].error
        assert math.isclose(cells[0].bits_per_element, 10, rel_tol=0.01)

    def test_needs_input(self):
        with pytest.raises(ParameterError):
            compare_budget([], [10], 10)
