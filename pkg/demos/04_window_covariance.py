"""Covariance of coprime counts in two windows, three ways.

G(n1, n2, h1, h2, q) is computable by brute enumeration, by the fast
three-sum form (which takes primorial moduli as prime lists), and by a
compact Moebius divisor sum. All three agree; the enumeration is the oracle.
"""
from fractions import Fraction

from sqprimes import covariance as cov
from sqprimes.primes import table_for_k

print("three routes on G(6, 30, 2, 5, 3):")
print("  enum    :", cov.g_enum(6, 30, 2, 5, 3))
print("  threesum:", cov.g_threesum(6, 30, 2, 5, 3, exact=True))
print("  compact :", cov.g_compact(6, 30, 2, 5, 3, exact=True))

# single odd prime, non-overlapping windows: exactly -h1 h2 / p^2
p, h1, h2, q = 11, 2, 3, 4
assert cov.g_enum(p, p, h1, h2, q) == Fraction(-h1 * h2, p * p)
print(f"\nG({p},{p},{h1},{h2},{q}) = -h1 h2/p^2 = {Fraction(-h1*h2, p*p)}")

# the variance H(n, h) = G(n, n, h, h, 0); full-period windows have none
print("H(2,1) =", cov.h_variance(2, 1, exact=True),
      " H(6,2) =", cov.h_variance(6, 2, exact=True),
      " H(6,6) =", cov.h_variance(6, 6, exact=True))

# primorial moduli never materialize as integers
big = cov.Modulus.primorial(200)
print(f"\nP#200 carries {len(big.primes)} primes, value materialized: {big.value}")
print("G(P#100, P#120, 50, 80, 300) =",
      cov.g_threesum(cov.Modulus.primorial(100), cov.Modulus.primorial(120), 50, 80, 300))

# summed over interval pairs these covariances explain the correlated model
table = table_for_k(150)
print("\nkappa(1) at K=100:", cov.kappa_theory(table, 100, 1))
print("Var uncorrelated (sum of H):", cov.var_uncorrelated_theory(table, 100))
print("Var correlated  (with pairs):", cov.var_correlated_theory(table, 100))
print("deviation bound sqrt(2 e^-gamma li):", cov.sigma_upper_bound(table, 100))
