import math

import numpy as np
import pytest
from scipy import stats

from fraccount import (
    ConstraintError,
    InsufficientDataError,
    RngSpec,
    SamplingRangeError,
    SeriesConfig,
    UnsupportedError,
    build_survival_table,
    compound_mean,
    degenerate_jump,
    exponential_jump,
    first_arrival_ks_check,
    make_rng,
    make_spec,
    mean,
    mittag_leffler,
    moment_set,
    normal_jump,
    pmf_table,
    sample_compound,
    sample_compounds,
    sample_count,
    sample_counts,
    sample_first_arrival,
    sample_first_arrivals,
    simulate_counts_classical,
    simulate_path_classical,
    summarize,
    survival_zero,
    variance,
)

POISSON = make_spec(1.0, 0.0, 1.0)
FRAC = make_spec(0.5, 0.0, 1.0)
STRETCH = make_spec(1.0, -0.5, 1.0)
MIXED = make_spec(0.7, 0.1, 1.0)


class TestRng:
    def test_make_rng_forms(self):
        assert isinstance(make_rng(7), np.random.Generator)
        assert isinstance(make_rng(RngSpec(7)), np.random.Generator)
        gen = make_rng(np.random.default_rng(3))
        assert make_rng(gen) is gen

    def test_unknown_algorithm(self):
        with pytest.raises(UnsupportedError):
            make_rng(RngSpec(7, algorithm="mt19937"))

    def test_bad_type(self):
        with pytest.raises(ConstraintError):
            make_rng("seed")

    def test_bit_reproducible_streams(self):
        a = sample_counts(POISSON, 1.0, RngSpec(99), 4096)
        b = sample_counts(POISSON, 1.0, RngSpec(99), 4096)
        assert np.array_equal(a, b)
        fa = sample_first_arrivals(FRAC, 4096, RngSpec(5))
        fb = sample_first_arrivals(FRAC, 4096, RngSpec(5))
        assert np.array_equal(fa, fb)
        ca = sample_compounds(POISSON, 1.0, exponential_jump(2.0), RngSpec(1), 512)
        cb = sample_compounds(POISSON, 1.0, exponential_jump(2.0), RngSpec(1), 512)
        assert np.array_equal(ca, cb)
        pa = simulate_path_classical(STRETCH, 4.0, RngSpec(11))
        pb = simulate_path_classical(STRETCH, 4.0, RngSpec(11))
        assert np.array_equal(pa, pb)


class TestSummarize:
    def test_zeros(self):
        s = summarize([0.0, 0.0, 0.0, 0.0])
        assert s.mean == 0.0
        assert s.variance == 0.0
        assert math.isnan(s.skewness)

    def test_small_sample(self):
        s = summarize([1, 2, 3, 4, 5])
        assert s.mean == 3.0
        assert abs(s.variance - 2.5) < 1e-14
        assert s.n_samples == 5

    def test_needs_two(self):
        with pytest.raises(InsufficientDataError):
            summarize([1.0])

    def test_matches_numpy_and_scipy(self):
        rng = np.random.default_rng(5)
        x = rng.gamma(2.0, size=20000)
        s = summarize(x)
        assert abs(s.mean - x.mean()) < 1e-12
        assert abs(s.variance - x.var(ddof=1)) < 1e-10
        assert abs(s.skewness - stats.skew(x)) < 1e-10
        assert abs(s.kurtosis_excess - stats.kurtosis(x)) < 1e-9
        assert abs(s.se_mean - x.std(ddof=1) / math.sqrt(x.size)) < 1e-12

    def test_se_scaling(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=40000)
        half = summarize(x[:20000])
        full = summarize(x)
        ratio = half.se_mean / full.se_mean
        assert abs(ratio - math.sqrt(2.0)) < 0.05

    def test_chunked_matches_direct(self):
        # crosses the internal chunk boundary
        rng = np.random.default_rng(7)
        x = rng.normal(loc=3.0, size=(1 << 16) + 1234)
        s = summarize(x)
        d = x - x.mean()
        assert abs(s.skewness - (d**3).mean() / (d**2).mean() ** 1.5) < 1e-9


class TestSampleCount:
    def test_time_zero(self):
        gen = make_rng(4)
        assert all(sample_count(POISSON, 0.0, gen) == 0 for _ in range(20))

    def test_poisson_mean_gate(self):
        counts = sample_counts(POISSON, 1.0, RngSpec(42), 10**6)
        s = summarize(counts)
        assert abs(s.mean - 1.0) <= 0.003

    def test_grid_spec_moments_within_4se(self):
        spec = MIXED
        counts = sample_counts(spec, 1.0, RngSpec(21), 10**6)
        s = summarize(counts)
        assert abs(s.mean - mean(spec, 1.0)) <= 4.0 * s.se_mean
        assert abs(s.variance - variance(spec, 1.0)) <= 4.0 * s.se_variance

    def test_skewness_kurtosis_within_4se(self):
        # delta-method standard errors from sample central moments
        spec = MIXED
        x = sample_counts(spec, 1.0, RngSpec(33), 4 * 10**5).astype(float)
        n = x.size
        d = x - x.mean()
        m = {k: float((d**k).mean()) for k in range(2, 9)}
        var_m2 = (m[4] - m[2] ** 2) / n
        var_m3 = (m[6] - m[3] ** 2 + 9 * m[2] ** 3 - 6 * m[2] * m[4]) / n
        cov_23 = (m[5] - 4 * m[2] * m[3]) / n
        g1 = m[3] / m[2] ** 1.5
        dg_dm3 = m[2] ** -1.5
        dg_dm2 = -1.5 * m[3] * m[2] ** -2.5
        se_g1 = math.sqrt(
            max(
                dg_dm3**2 * var_m3
                + dg_dm2**2 * var_m2
                + 2 * dg_dm3 * dg_dm2 * cov_23,
                1e-30,
            )
        )
        ms = moment_set(spec, 1.0)
        assert abs(g1 - ms.skewness) <= 4.0 * se_g1
        var_m4 = (m[8] - m[4] ** 2 + 16 * m[2] * m[3] ** 2 - 8 * m[5] * m[3]) / n
        cov_24 = (m[6] - m[2] * m[4] - 4 * m[3] ** 2) / n
        g2 = m[4] / m[2] ** 2 - 3.0
        dk_dm4 = m[2] ** -2
        dk_dm2 = -2.0 * m[4] * m[2] ** -3
        se_g2 = math.sqrt(
            max(
                dk_dm4**2 * var_m4
                + dk_dm2**2 * var_m2
                + 2 * dk_dm4 * dk_dm2 * cov_24,
                1e-30,
            )
        )
        assert abs(g2 - ms.kurtosis_excess) <= 4.0 * se_g2

    def test_tail_assignment(self):
        # a tiny forced table puts overflow mass at n_max + 1
        table = pmf_table(POISSON, 1.0, 30)
        assert table.tail_mass < 1e-9


class TestFirstArrival:
    def test_exponential_mean(self):
        spec = make_spec(1.0, 0.0, 2.0)
        gen = make_rng(17)
        draws = np.array([sample_first_arrival(spec, gen) for _ in range(3000)])
        s = summarize(draws)
        assert abs(s.mean - 0.5) <= 4.0 * s.se_mean

    def test_batch_weibull_cdf_point(self):
        draws = sample_first_arrivals(STRETCH, 10**5, RngSpec(8))
        emp = float(np.mean(draws <= 1.0))
        want = 1.0 - math.exp(-2.0)
        assert abs(emp - want) <= 4.0 * math.sqrt(want * (1 - want) / 10**5)

    def test_batch_fractional_survival_point(self):
        draws = sample_first_arrivals(FRAC, 10**5, RngSpec(9))
        emp = float(np.mean(draws > 1.0))
        want = mittag_leffler(0.5, -1.0)
        assert abs(emp - want) <= 4.0 * math.sqrt(want * (1 - want) / 10**5)

    def test_bisection_solves_survival(self):
        gen = make_rng(123)
        for _ in range(20):
            state = gen.bit_generator.state
            tau = sample_first_arrival(MIXED, gen)
            gen.bit_generator.state = state
            u = gen.random()
            assert abs(survival_zero(MIXED, tau) - u) < 1e-8

    def test_range_error_when_tail_unreachable(self):
        cfg = SeriesConfig(z_abs_max=2.0, max_terms=256)
        gen = make_rng(0)
        with pytest.raises(SamplingRangeError):
            for _ in range(64):
                sample_first_arrival(FRAC, gen, cfg)

    def test_ks_check_passes(self):
        ks = first_arrival_ks_check(FRAC, 2 * 10**4, RngSpec(31))
        assert ks.passed
        assert 0.0 <= ks.censored_fraction < 0.1
        ks2 = first_arrival_ks_check(STRETCH, 2 * 10**4, RngSpec(32))
        assert ks2.passed

    def test_survival_table_monotone(self):
        table = build_survival_table(MIXED)
        assert np.all(np.diff(table.tau) > 0)
        assert np.all(np.diff(table.surv) < 0)
        assert 0.0 < table.u_floor < 1.0


class TestClassicalPaths:
    def test_poisson_chi2(self):
        counts = simulate_counts_classical(POISSON, 10.0, 10**5, RngSpec(77))
        edges = np.arange(-0.5, 26.5)
        observed, _ = np.histogram(counts, bins=edges)
        expect = stats.poisson(10.0).pmf(np.arange(26)) * counts.size
        keep = expect > 5.0
        chi2 = float(np.sum((observed[keep] - expect[keep]) ** 2 / expect[keep]))
        dof = int(keep.sum()) - 1
        p = stats.chi2.sf(chi2, dof)
        assert p > 0.001

    def test_stretched_count_mean(self):
        counts = simulate_counts_classical(STRETCH, 4.0, 10**5, RngSpec(78))
        s = summarize(counts)
        assert abs(s.mean - 4.0) <= 4.0 * s.se_mean

    def test_fractional_count_mean(self):
        counts = simulate_counts_classical(FRAC, 1.0, 10**5, RngSpec(79))
        s = summarize(counts)
        want = 1.0 / math.gamma(1.5)
        assert abs(s.mean - want) <= 4.0 * s.se_mean

    def test_fractional_counts_match_pmf(self):
        counts = simulate_counts_classical(FRAC, 1.0, 10**5, RngSpec(80))
        table = pmf_table(FRAC, 1.0)
        expect = table.probs * counts.size
        observed = np.bincount(counts, minlength=len(table.probs))[: len(table.probs)]
        keep = expect > 5.0
        chi2 = float(np.sum((observed[keep] - expect[keep]) ** 2 / expect[keep]))
        p = stats.chi2.sf(chi2, int(keep.sum()) - 1)
        assert p > 0.001

    def test_path_times_sorted_within_horizon(self):
        for spec in (POISSON, STRETCH, FRAC):
            times = simulate_path_classical(spec, 5.0, RngSpec(81))
            assert np.all(np.diff(times) > 0)
            assert np.all(times <= 5.0)
            assert np.all(times > 0)

    def test_path_counts_agree_with_batch(self):
        n = 400
        gen = make_rng(82)
        lens = [len(simulate_path_classical(POISSON, 3.0, gen)) for _ in range(n)]
        s = summarize(np.array(lens, dtype=float))
        assert abs(s.mean - 3.0) <= 4.0 * s.se_mean

    def test_unsupported_regime(self):
        with pytest.raises(UnsupportedError):
            simulate_path_classical(MIXED, 1.0, RngSpec(1))
        with pytest.raises(UnsupportedError):
            simulate_counts_classical(MIXED, 1.0, 10, RngSpec(1))


class TestCompound:
    def test_zero_jump(self):
        jump = degenerate_jump(0.0)
        gen = make_rng(55)
        assert all(
            sample_compound(POISSON, 1.0, jump, gen) == 0.0 for _ in range(10)
        )

    def test_degenerate_mean(self):
        totals = sample_compounds(
            POISSON, 2.0, degenerate_jump(3.0), RngSpec(56), 10**5
        )
        s = summarize(totals)
        assert abs(s.mean - 6.0) <= 4.0 * s.se_mean

    def test_exponential_jump_mean(self):
        totals = sample_compounds(
            FRAC, 1.0, exponential_jump(1.0), RngSpec(57), 2 * 10**5
        )
        s = summarize(totals)
        want = compound_mean(FRAC, 1.0, 1.0)
        assert abs(s.mean - want) <= 4.0 * s.se_mean

    def test_normal_jump_mean(self):
        totals = sample_compounds(
            POISSON, 1.0, normal_jump(2.0, 0.5), RngSpec(58), 10**5
        )
        s = summarize(totals)
        assert abs(s.mean - 2.0) <= 4.0 * s.se_mean

    def test_batch_total_handles_zero_counts(self):
        gamma_draws = np.random.default_rng(1).standard_gamma(np.array([0, 0, 3]))
        assert gamma_draws[0] == 0.0 and gamma_draws[1] == 0.0

    def test_scalar_matches_law(self):
        gen = make_rng(59)
        vals = np.array(
            [sample_compound(POISSON, 1.0, degenerate_jump(2.0), gen) for _ in range(2000)]
        )
        s = summarize(vals)
        assert abs(s.mean - 2.0) <= 4.0 * s.se_mean

    def test_exponential_jump_validation(self):
        with pytest.raises(ConstraintError):
            exponential_jump(0.0)
        jump = exponential_jump(2.0)
        from fraccount import DomainError

        with pytest.raises(DomainError):
            jump.mgf(0.5)
