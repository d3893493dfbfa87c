"""Acceptance suite: every primary criterion at its stated tolerance.

The heavy shared computation (exact interval counts for k <= 2*10^4,
reaching p^2 ~ 5*10^10) runs once per session. Run with -s to see one
PASS line per criterion.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from sqprimes import covariance as cov
from sqprimes import models, stats
from sqprimes.primes import cumulative_pi, interval_counts, table_for_k

K_BIG = 20_000
SEED = 20240611


def report(name, ok, detail=""):
    print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{name} {detail}"


@pytest.fixture(scope="module")
def big():
    table = table_for_k(K_BIG)
    counts = interval_counts(table, K_BIG)
    return table, counts


@pytest.fixture(scope="module")
def ensembles_300(big):
    table, _ = big
    corr = models.model_ensemble("correlated", table, 300, 150, seed=SEED)
    uncorr = models.model_ensemble("uncorrelated", table, 300, 150, seed=SEED)
    return table, corr, uncorr


def test_exact_counting_vs_independent_oracle(big):
    sympy = pytest.importorskip("sympy")
    table, _ = big
    t0 = time.monotonic()
    cum = cumulative_pi(table, 10_000)
    rng = np.random.default_rng(SEED)
    ks = rng.choice(np.arange(1, 10_001), size=20, replace=False)
    for k in ks:
        oracle = int(sympy.primepi(table.p(int(k) + 1) ** 2 - 1))
        assert cum[k - 1] == oracle, (k, cum[k - 1], oracle)
    elapsed = time.monotonic() - t0
    report("exact counting (K=1e4, 20 random k vs primepi)", elapsed < 240,
           f"exact equality, {elapsed:.0f}s")


GRID_PAIRS = [(2, 2), (2, 6), (6, 6), (6, 30), (30, 30), (2, 30)]


def _window_sums(n, h, period):
    f = np.array([1 if math.gcd(r, n) == 1 else 0 for r in range(n)], dtype=np.int64)
    ext = np.resize(f, period + h)
    c = np.concatenate(([0], np.cumsum(ext)))
    return c[h : period + h] - c[:period]


def _phi(n):
    return sum(1 for r in range(1, n + 1) if math.gcd(r, n) == 1)


def test_oracle_equivalence_grid():
    worst = 0.0
    checked = 0
    for n1, n2 in GRID_PAIRS:
        period = n1 * n2
        mean_term = None
        for h1 in range(1, 13):
            for h2 in range(h1, 13):
                f1 = _window_sums(n1, h1, period)
                f2 = _window_sums(n2, h2, period)
                if mean_term is None:
                    mean_term = _phi(n1) * _phi(n2)
                mu = h1 * h2 * mean_term / period
                for q in range(0, period + 1):
                    enum = float(np.dot(f1, np.roll(f2, -q))) / period - mu
                    three = cov.g_threesum(n1, n2, h1, h2, q)
                    compact = cov.g_compact(n1, n2, h1, h2, q)
                    worst = max(worst, abs(three - enum), abs(compact - enum))
                    checked += 1
    assert cov.h_variance(2, 1, exact=True) == Fraction(1, 4)
    assert cov.h_variance(6, 2, exact=True) == Fraction(2, 9)
    assert cov.g_enum(2, 6, 1, 2, 1) == 0
    report("oracle equivalence grid", worst <= 1e-9,
           f"{checked} triples, max |diff| {worst:.2e}")


def test_single_prime_law():
    checked = 0
    for p in (3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        for h1 in range(1, p):
            for h2 in range(1, p - h1 + 1):
                for q in range(h1, p - h2 + 1):
                    got = cov.g_enum(p, p, h1, h2, q)
                    assert got == Fraction(-h1 * h2, p * p), (p, h1, h2, q, got)
                    checked += 1
    report("single-prime law G = -h1 h2 / p^2", True, f"{checked} exact cases")


def test_periodicity_and_zero_mean():
    worst = 0.0
    for n1, n2 in GRID_PAIRS:
        for h1, h2 in ((1, 2), (3, 7), (5, 12), (4, 4)):
            vals = {q: cov.g_enum(n1, n2, h1, h2, q) for q in range(0, n1 * n2 + 1)}
            for q in range(0, n1 * n2 + 1 - n1):
                assert vals[q] == vals[q + n1], (n1, n2, h1, h2, q)
            total = sum(vals[q] for q in range(1, n1 + 1))
            worst = max(worst, abs(float(total)))
    report("periodicity in q and zero mean over a period", worst <= 1e-9,
           f"max |period mean| {worst:.2e}")


def test_variance_bound_series(big):
    table, _ = big
    hs = cov.h_variance_series(table, 300)
    bound = (stats.interval_lengths(table, 300)
             * stats.euler_density_series(table, 300))
    ok = bool(np.all(hs <= bound * (1 + 1e-12) + 1e-12) and np.all(hs >= -1e-12))
    report("variance bound H(p_j#, l_j) <= l_j prod(1-1/p), j <= 300", ok,
           f"max ratio {float(np.max(hs / bound)):.4f}")


def test_mertens_limit(big):
    table, _ = big
    tilde = stats.tilde_pi_series(table, 1000)
    l = stats.interval_lengths(table, 1000).astype(float)
    log_sq = np.log(table.primes[1:1001].astype(float) ** 2)
    ratio = (tilde / (l / log_sq))[899:1000]
    ok = ratio.min() >= 1.10 and ratio.max() <= 1.15
    report("Mertens limit: expected-count ratio in [1.10, 1.15] on k in [900,1000]",
           ok, f"range [{ratio.min():.4f}, {ratio.max():.4f}]")


def test_truncated_sum(big):
    table, _ = big
    tau = stats.tau_truncated(table, 1000)
    l = stats.interval_lengths(table, 1000).astype(float)
    log_sq = np.log(table.primes[1:1001].astype(float) ** 2)
    ratio = (tau / (l / log_sq))[899:1000]
    ok = ratio.min() >= 1.00 and ratio.max() <= 1.06
    exact = stats.tau_truncated_exact(table, 8)
    from itertools import combinations

    for k in range(1, 9):
        ps = [table.p(i) for i in range(1, k + 1)]
        bound = table.p(k + 1) ** 2
        acc = sum((Fraction((-1) ** len(c), math.prod(c))
                   for r in range(k + 1) for c in combinations(ps, r)
                   if math.prod(c) < bound), Fraction(0))
        assert exact[k - 1] == (table.p(k + 1) ** 2 - table.p(k) ** 2) * acc
    report("truncated sum: ratio in [1.00, 1.06] + exact cross-check k <= 8",
           ok, f"range [{ratio.min():.4f}, {ratio.max():.4f}]")


def test_normalization_population(big):
    table, counts = big
    pi_bar = stats.normalized_series(table, counts)
    valid = pi_bar[~np.isnan(pi_bar)]
    mean, std = float(valid.mean()), float(valid.std())
    ok = -0.05 <= mean <= 0.05 and 0.90 <= std <= 1.10
    report("normalized interval counts: mean in [-0.05, 0.05], std in [0.90, 1.10]",
           ok, f"mean {mean:.4f}, std {std:.4f}, n {len(valid)}")


def test_normalized_error_band(big):
    table, counts = big
    err = stats.error_series(table, counts)
    e_end = float(err.E[K_BIG - 1])
    running = float(err.E[10_000 - 1 : K_BIG].mean())
    ok = -0.9 <= e_end <= -0.3 and -0.75 <= running <= -0.45
    report("normalized error: E(2e4) in [-0.9, -0.3], mean over [1e4, 2e4] in [-0.75, -0.45]",
           ok, f"E(2e4) {e_end:.3f}, running mean {running:.3f}")


def test_model_structure(big, ensembles_300):
    table, counts = big
    zero = models.realize_correlated(table, 2000, seed=0,
                                     offsets=np.zeros(2000, dtype=np.int64))
    exact = bool(np.array_equal(zero.counts, counts[:2000]))

    uncorr_100 = models.model_ensemble("uncorrelated", table, 100, 300, seed=SEED)
    es_100 = models.ensemble_stats(uncorr_100, table, "uncorrelated")
    theory = cov.var_uncorrelated_theory(table, 100)
    var_ratio = es_100.var_total / theory

    _, corr, uncorr = ensembles_300
    es_c = models.ensemble_stats(corr, table, "correlated")
    es_u = models.ensemble_stats(uncorr, table, "uncorrelated")
    less_var = es_c.var_total < es_u.var_total
    ok = exact and abs(var_ratio - 1) <= 0.15 and less_var
    report("model structure: zero-offset exact, Var vs Sum H within 15%, corr < uncorr",
           ok, f"var ratio {var_ratio:.3f}, corr/uncorr "
               f"{es_c.var_total / es_u.var_total:.3f}")


def test_covariance_sums(ensembles_300):
    table, corr, _ = ensembles_300
    es = models.ensemble_stats(corr, table, "correlated")
    k_sim1, k_sim2 = float(es.kappa[1]), float(es.kappa[2])
    k_th1 = cov.kappa_theory(table, 300, 1)
    rel = abs(k_sim1 / k_th1 - 1)
    ratio = abs(k_sim1 / k_sim2)
    ok = k_sim1 < 0 and rel <= 0.2 and ratio > 2
    report("covariance sums: kappa_sim(1) < 0, within 20% of theory, lag ratio > 2",
           ok, f"sim {k_sim1:.0f} th {k_th1:.0f} rel {rel:.3f} lag ratio {ratio:.2f}")


def test_bound_ordering(big):
    table, counts = big
    k = K_BIG
    lengths = stats.interval_lengths(table, k).astype(float)
    x = float(table.p(k + 1)) ** 2
    log_sq = np.log(table.primes[1 : k + 1].astype(float) ** 2)
    eps = float((2 + np.cumsum(counts))[-1] - stats.li_at(x))
    sq = table.primes[1 : k + 1].astype(float) ** 2
    discrete = math.sqrt(float(np.sum(lengths * np.log(sq / lengths) / log_sq**2)))
    uncorr = math.sqrt(2 * math.exp(-stats.EULER_GAMMA) * stats.li_at(x))
    koch = math.sqrt(x) * math.log(x)
    ok = abs(eps) < discrete < uncorr < koch
    report("bound ordering at k = 2e4: |eps| < discrete < sqrt(2e^-g li) < Koch",
           ok, f"|eps| {abs(eps):.0f} < {discrete:.0f} < {uncorr:.0f} < {koch:.0f}")
