import math

import numpy as np
import pytest

from sqprimes import models
from sqprimes.primes import interval_counts, qr_first_positions
from sqprimes.stats import EULER_GAMMA, interval_lengths, tilde_pi_series
from sqprimes.covariance import var_uncorrelated_theory


class TestZeroOffsetHook:
    def test_reproduces_primes(self, table_1k, counts_1k):
        K = 300
        series = models.realize_correlated(table_1k, K, seed=0,
                                           offsets=np.zeros(K, dtype=np.int64))
        assert np.array_equal(series.counts, counts_1k[:K])

    def test_offset_periodicity(self, table_1k, counts_1k):
        # shifting any offset by its prime changes nothing
        K = 60
        oa = models.offset_assignment(table_1k, K, seed=11)
        shifted = oa.offsets + table_1k.primes[:K]
        a = models.realize_correlated(table_1k, K, seed=0, offsets=oa.offsets)
        b = models.realize_correlated(table_1k, K, seed=0, offsets=shifted)
        assert np.array_equal(a.counts, b.counts)


class TestDeterminism:
    def test_same_seed_same_series(self, table_1k):
        a = models.realize_correlated(table_1k, 40, seed=42)
        b = models.realize_correlated(table_1k, 40, seed=42)
        assert np.array_equal(a.counts, b.counts)

    def test_ensemble_rows_match_single_realizations(self, table_1k):
        m = models.model_ensemble("uncorrelated", table_1k, 30, 5, seed=9)
        for r in (0, 3):
            one = models.realize_uncorrelated(table_1k, 30, seed=9, realization=r)
            assert np.array_equal(m[r], one.counts)
        c = models.model_ensemble("constrained", table_1k, 30, 3, seed=9)
        one = models.realize_constrained(table_1k, 30, seed=9, realization=2)
        assert np.array_equal(c[2], one.counts)

    def test_offsets_mirror_kernel(self, table_1k):
        oa = models.offset_assignment(table_1k, 50, seed=77, realization=1)
        drawn = models.realize_correlated(table_1k, 50, seed=77, realization=1)
        fixed = models.realize_correlated(table_1k, 50, seed=0, offsets=oa.offsets)
        assert np.array_equal(drawn.counts, fixed.counts)
        assert np.all((0 <= oa.offsets) & (oa.offsets < table_1k.primes[:50]))

    def test_thread_count_invariance(self, table_1k):
        import numba

        m1 = models.model_ensemble("correlated", table_1k, 40, 6, seed=5)
        saved = numba.get_num_threads()
        try:
            numba.set_num_threads(1)
            m2 = models.model_ensemble("correlated", table_1k, 40, 6, seed=5)
        finally:
            numba.set_num_threads(saved)
        assert np.array_equal(m1, m2)


class TestCountsShape:
    def test_counts_within_bounds(self, table_1k):
        K = 80
        lengths = interval_lengths(table_1k, K)
        for model in models.MODELS:
            m = models.model_ensemble(model, table_1k, K, 10, seed=3)
            assert np.all(m >= 0) and np.all(m <= lengths)

    def test_bad_args(self, table_1k):
        with pytest.raises(ValueError):
            models.model_ensemble("cramer", table_1k, 10, 5, seed=0)
        with pytest.raises(ValueError):
            models.model_ensemble("correlated", table_1k, 10, 0, seed=0)


class TestEnsembleMeans:
    @pytest.mark.parametrize("model", ["correlated", "uncorrelated"])
    def test_mean_matches_expected_count(self, table_1k, model):
        K, R = 64, 1000
        m = models.model_ensemble(model, table_1k, K, R, seed=2)
        tilde = tilde_pi_series(table_1k, K)
        mean = m.mean(axis=0)
        se = m.std(axis=0, ddof=1) / math.sqrt(R)
        for j in (5, 20, 60):
            assert abs(mean[j - 1] - tilde[j - 1]) <= 3 * se[j - 1]

    def test_uncorrelated_cross_covariance_vanishes(self, table_1k):
        K, R = 40, 2000
        m = models.model_ensemble("uncorrelated", table_1k, K, R, seed=4).astype(float)
        for i, j in [(3, 17), (10, 30)]:
            a, b = m[:, i - 1], m[:, j - 1]
            c = np.mean((a - a.mean()) * (b - b.mean()))
            se = a.std() * b.std() / math.sqrt(R)
            assert abs(c) <= 3 * se

    def test_uncorrelated_variance_near_theory(self, table_1k):
        K, R = 100, 400
        m = models.model_ensemble("uncorrelated", table_1k, K, R, seed=6)
        es = models.ensemble_stats(m, table_1k, "uncorrelated")
        theory = var_uncorrelated_theory(table_1k, K)
        assert abs(es.var_total / theory - 1) < 0.15


class TestConstrained:
    def test_first_interval(self, table_1k):
        # every sequence sampled: the even marks start at position 2, so
        # 1, 3, 5 survive out of [4..8]
        m = models.model_ensemble("constrained", table_1k, 1, 64, seed=8)
        assert set(m[:, 0].tolist()) == {3}
        assert qr_first_positions(2) == {2}

    def test_first_interval_pinned(self, table_1k):
        # pinning the last prime to position 1 marks 1, 3, 5, leaving 5 and 7
        s = models.realize_constrained(table_1k, 1, seed=8, pin_last=True)
        assert s.counts.tolist() == [2]

    def test_second_interval_is_deterministic(self, table_1k):
        # both candidate sets are singletons: p_1 starts at 2, p_2 at 3
        m = models.model_ensemble("constrained", table_1k, 2, 64, seed=8)
        marked = {t for t in range(2, 17, 2)} | {t for t in range(3, 17, 3)}
        assert set(m[:, 1].tolist()) == {16 - len(marked)}

    def test_bias_and_ratio(self, table_1k):
        K, R = 500, 200
        m = models.model_ensemble("constrained", table_1k, K, R, seed=12)
        tilde = tilde_pi_series(table_1k, K)
        cum_eta = np.cumsum(m, axis=1)
        cum_tilde = np.cumsum(tilde)
        bias = (cum_eta[:, -1] - cum_tilde[-1]).mean()
        assert bias > 0
        ratio = (cum_eta[:, -1] / cum_tilde[-1]).mean()
        assert abs(ratio - 1) < 0.01


class TestMeanCorrected:
    def test_values(self, table_1k):
        series = models.realize_correlated(table_1k, 20, seed=1)
        scaled = models.mean_corrected(series)
        factor = math.exp(EULER_GAMMA) / 2
        assert np.allclose(scaled, series.counts * factor)
        assert math.isclose(6.4 * factor, 5.6997, rel_tol=1e-4)

    def test_zero_and_ordering(self, table_1k):
        series = models.RealizationSeries("correlated", 3,
                                          np.array([0, 4, 9]), seed=0)
        scaled = models.mean_corrected(series)
        assert scaled[0] == 0.0 and scaled[1] < scaled[2]


class TestEnsembleStats:
    def test_single_realization_diagonal(self, table_1k):
        m = models.model_ensemble("correlated", table_1k, 50, 1, seed=13)
        es = models.ensemble_stats(m, table_1k, "correlated")
        eps = m[0] - tilde_pi_series(table_1k, 50)
        assert math.isclose(es.kappa[0], float((eps**2).sum()), rel_tol=1e-12)
        assert math.isclose(es.var_diag, es.kappa[0], rel_tol=1e-12)

    def test_uncorrelated_lag1_vanishes(self, table_1k):
        K, R = 60, 800
        m = models.model_ensemble("uncorrelated", table_1k, K, R, seed=14)
        es = models.ensemble_stats(m, table_1k, "uncorrelated")
        eps = m - tilde_pi_series(table_1k, K)
        prods = np.array([(eps[r, :-1] * eps[r, 1:]).sum() for r in range(R)])
        se = prods.std(ddof=1) / math.sqrt(R)
        assert abs(es.kappa[1]) <= 3 * se

    def test_correlated_lag1_negative(self, table_1k):
        m = models.model_ensemble("correlated", table_1k, 300, 60, seed=15)
        es = models.ensemble_stats(m, table_1k, "correlated")
        assert es.kappa[1] < 0

    def test_empty_rejected(self, table_1k):
        with pytest.raises(ValueError):
            models.ensemble_stats(np.empty((0, 0)), table_1k)


class TestSerialization:
    def test_roundtrip(self, table_1k, tmp_path):
        series = models.realize_constrained(table_1k, 25, seed=3, realization=7)
        path = tmp_path / "run.csv"
        models.write_series_csv(series, path)
        assert path.exists() and path.with_suffix(".json").exists()
        back = models.read_series_csv(path)
        assert back.model == "constrained" and back.K == 25
        assert back.seed == 3 and back.realization == 7
        assert np.array_equal(back.counts, series.counts)
        header = path.read_text().splitlines()[0]
        assert header == "k,count"
