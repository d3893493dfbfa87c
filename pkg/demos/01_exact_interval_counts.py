"""Exact prime counts per interval between consecutive squared primes.

Each s_k = [p_k^2, p_{k+1}^2) is fully determined by the first k primes,
so a segmented sieve with a tiny base table counts it exactly.
"""
import numpy as np

from sqprimes.primes import cumulative_pi, interval_counts, make_interval, table_for_k

table = table_for_k(2000)

print("first intervals:")
for k in range(1, 8):
    iv = make_interval(table, k)
    print(f"  s_{k} = [{iv.p_lo**2}, {iv.p_hi**2 - 1}]  length {iv.length}")

counts = interval_counts(table, 2000)
print("\npi_k for k = 1..10:", counts[:10].tolist())

# pi(p_{k+1}^2) telescopes: 2 primes below 4, then one interval at a time
cum = cumulative_pi(table, 2000, counts=counts)
print(f"pi(p_2001^2) = pi({table.p(2001)**2}) = {cum[-1]}")
assert cum[-1] == 2 + counts.sum()

# the interval lengths l_k = 2 p_{k+1} g_k - g_k^2 line up on per-gap curves
gaps = np.diff(table.primes[:2001])
lengths = np.diff(table.primes[:2001].astype(np.int64) ** 2)
assert np.all(lengths == 2 * table.primes[1:2001] * gaps - gaps**2)
print("\ngap values seen so far:", sorted(set(gaps[:2000].tolist()))[:10], "...")
