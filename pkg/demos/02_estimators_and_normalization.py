"""Expected counts, truncated Moebius sums, and the normal-model normalization.

Three estimates of pi_k, each divided by l_k / log p_{k+1}^2:
the Euler-product expectation tends to 2 e^-gamma ~ 1.1229, the truncated
divisor sum to ~1.03, and the counts themselves to 1.
"""
import numpy as np

from sqprimes import stats
from sqprimes.primes import interval_counts, table_for_k

K = 1000
table = table_for_k(K)
counts = interval_counts(table, K)

l = stats.interval_lengths(table, K).astype(float)
base = l / np.log(table.primes[1 : K + 1].astype(float) ** 2)
tilde = stats.tilde_pi_series(table, K)
tau = stats.tau_truncated(table, K)

print("ratios to l_k / log p_{k+1}^2, averaged over k in [900, 1000]:")
print(f"  expected count : {np.mean((tilde / base)[899:]):.4f}   (2 e^-gamma = {stats.TWO_E_NEG_GAMMA:.4f})")
print(f"  truncated sum  : {np.mean((tau / base)[899:]):.4f}")
print(f"  exact counts   : {np.mean((counts / base)[899:]):.4f}")

# normalized counts (pi_k - mu_k) / sigma_k should look standard normal
pi_bar = stats.normalized_series(table, counts)
valid = pi_bar[~np.isnan(pi_bar)]
print(f"\nnormalized counts over k <= {K}: mean {valid.mean():+.3f}, std {valid.std():.3f}")

# the global error pi - li, normalized by Delta_k, hovers near -0.6
err = stats.error_series(table, counts)
print(f"normalized global error E_k at k = {K}: {err.E[-1]:+.3f}")
print(f"adjusted error (c = {err.c}) at k = {K}: {err.epsilon_adj[-1]:+.1f} "
      f"vs raw {err.epsilon[-1]:+.1f}")
