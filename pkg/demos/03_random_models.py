"""The correlated, uncorrelated, and constrained random models.

Translating each prime's marking sequence by a random offset keeps or
discards the correlations between intervals depending on whether the
offsets are shared. The zero-translation configuration IS the primes.
"""
import numpy as np

from sqprimes import models
from sqprimes.primes import interval_counts, table_for_k
from sqprimes.stats import tilde_pi_series

K, R, SEED = 300, 100, 7
table = table_for_k(K + 10)

# zero offsets reproduce pi_k exactly: the primes are one sample point
zero = models.realize_correlated(table, K, seed=0, offsets=np.zeros(K, np.int64))
assert np.array_equal(zero.counts, interval_counts(table, K))
print("zero-translation realization equals the primes: OK")

tilde = tilde_pi_series(table, K)
for model in ("correlated", "uncorrelated"):
    ensemble = models.model_ensemble(model, table, K, R, seed=SEED)
    es = models.ensemble_stats(ensemble, table, model)
    print(f"{model:>13}: Var[sum] = {es.var_total:9.0f}   "
          f"no-covariance part = {es.var_diag:9.0f}   kappa(1) = {es.kappa[1]:8.0f}")

eta = models.model_ensemble("constrained", table, K, R, seed=SEED)
bias = (eta.sum(axis=1) - tilde.sum()).mean()
print(f"  constrained: mean cumulative excess over expected counts = {bias:+.1f}")
