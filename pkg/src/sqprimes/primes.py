"""Prime generation and exact prime counting over [p_k^2, p_{k+1}^2).

Every interval between consecutive squared primes is fully sieved by the
first k primes, so exact counts need only segmented marking with a small
base prime table. All indices are 1-based: p(1) = 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

INT64_MAX = np.iinfo(np.int64).max

# Default segment: 256 KiB of odd-number flags (512 KiB of integers),
# small enough to stay cache resident while marking.
DEFAULT_SEGMENT_ODDS = 1 << 18


class CapacityError(RuntimeError):
    """Requested range exceeds what the table / integer width supports."""


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """Immutable ordered table of all primes <= limit; primes[k-1] = p_k."""

    limit: int
    primes: np.ndarray  # int64, ascending

    def __post_init__(self):
        self.primes.setflags(write=False)

    def __len__(self) -> int:
        return len(self.primes)

    def p(self, k: int) -> int:
        """1-based access: p(1) = 2."""
        if k < 1 or k > len(self.primes):
            raise IndexError(f"prime index {k} out of range 1..{len(self.primes)}")
        return int(self.primes[k - 1])

    def require(self, k: int) -> None:
        """Raise CapacityError unless p_k is in the table."""
        if k < 1:
            raise IndexError(f"prime index {k} must be >= 1")
        if k > len(self.primes):
            raise CapacityError(
                f"table sieved to {self.limit} holds {len(self.primes)} primes; "
                f"p_{k} is out of reach"
            )


@dataclass
class Interval:
    """One interval s_k = [p_k^2, p_{k+1}^2 - 1] between consecutive squared primes."""

    k: int
    p_lo: int
    p_hi: int
    gap: int
    length: int
    count: int | None = None


def sieve_primes(limit: int) -> PrimeTable:
    """All primes <= limit by a plain sieve of Eratosthenes."""
    if limit < 2:
        raise ValueError(f"sieve limit must be >= 2, got {limit}")
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return PrimeTable(limit=limit, primes=np.flatnonzero(flags).astype(np.int64))


def table_for_k(k_max: int) -> PrimeTable:
    """A table guaranteed to contain p_{k_max + 1} (sized via the Rosser bound)."""
    n = k_max + 1
    if n < 6:
        bound = 15
    else:
        bound = int(n * (math.log(n) + math.log(math.log(n)))) + 10
    table = sieve_primes(bound)
    while len(table) < n:  # bound is proven for n >= 6; belt and braces
        bound *= 2
        table = sieve_primes(bound)
    return table


def _check_square(p: int) -> int:
    sq = p * p  # Python int, cannot wrap
    if sq > INT64_MAX:
        raise CapacityError(f"{p}^2 = {sq} exceeds 64-bit range")
    return sq


def make_interval(table: PrimeTable, k: int) -> Interval:
    """Build s_k from the table; the exact count stays unset."""
    if k < 1:
        raise IndexError(f"interval index {k} must be >= 1")
    table.require(k + 1)
    p_lo, p_hi = table.p(k), table.p(k + 1)
    _check_square(p_hi)
    return Interval(k=k, p_lo=p_lo, p_hi=p_hi, gap=p_hi - p_lo, length=p_hi * p_hi - p_lo * p_lo)


@njit(cache=True)
def _count_segment(primes, n_primes, lo, hi, buf):
    """Composite-free odd count in [lo, hi), marking odd multiples of primes[1:n_primes].

    lo must be odd and >= 5; buf is a reusable uint8 scratch at least
    (hi - lo + 1) // 2 long.
    """
    n_odd = (hi - lo + 1) // 2
    for t in range(n_odd):
        buf[t] = 0
    for i in range(1, n_primes):  # primes[0] = 2 is handled by odd-only layout
        p = primes[i]
        if p * p >= hi:
            break
        m = ((lo + p - 1) // p) * p
        if m % 2 == 0:
            m += p
        for t in range((m - lo) // 2, n_odd, p):
            buf[t] = 1
    c = 0
    for t in range(n_odd):
        if buf[t] == 0:
            c += 1
    return c


@njit(cache=True)
def _count_range(primes, n_primes, lo, hi, seg_odds):
    """Count integers in [lo, hi) coprime to the first n_primes primes (lo >= 4)."""
    total = 0
    start = lo if lo % 2 == 1 else lo + 1
    buf = np.empty(seg_odds, dtype=np.uint8)
    seg_span = 2 * seg_odds
    s = start
    while s < hi:
        e = min(s + seg_span, hi)
        total += _count_segment(primes, n_primes, s, e, buf)
        s = e
    return total


@njit(cache=True, parallel=True)
def _interval_counts(primes, k_max, seg_odds):
    counts = np.zeros(k_max, dtype=np.int64)
    for j in prange(k_max):
        lo = primes[j] * primes[j]
        hi = primes[j + 1] * primes[j + 1]
        counts[j] = _count_range(primes, j + 1, lo, hi, seg_odds)
    return counts


def count_interval(interval: Interval, *, segment_odds: int = DEFAULT_SEGMENT_ODDS) -> int:
    """Exact number of primes in s_k by segmented sieving with the first k primes."""
    base = sieve_primes(max(interval.p_lo, 2))
    lo = _check_square(interval.p_lo)
    hi = _check_square(interval.p_hi)
    count = int(_count_range(base.primes, interval.k, lo, hi, segment_odds))
    interval.count = count
    return count


def count_range(lo: int, hi: int, base: PrimeTable, n_primes: int | None = None,
                *, segment_odds: int = DEFAULT_SEGMENT_ODDS) -> int:
    """Integers in [lo, hi) not divisible by any of the first n_primes primes.

    lo must be >= 4 and the prime set must cover sqrt(hi) for the result to
    be a prime count; callers may pass a larger n_primes, the extra primes
    are inert.
    """
    if lo < 4:
        raise ValueError("count_range needs lo >= 4 (2 and 3 are never candidates)")
    if hi > INT64_MAX:
        raise CapacityError(f"range end {hi} exceeds 64-bit range")
    if n_primes is None:
        n_primes = len(base)
    if n_primes < 1 or n_primes > len(base):
        raise ValueError(f"n_primes {n_primes} out of range 1..{len(base)}")
    if hi <= lo:
        return 0
    return int(_count_range(base.primes, n_primes, lo, hi, segment_odds))


def interval_counts(table: PrimeTable, k_max: int,
                    *, segment_odds: int = DEFAULT_SEGMENT_ODDS) -> np.ndarray:
    """Exact counts for every s_k, k = 1..k_max; intervals sieve independently."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    table.require(k_max + 1)
    _check_square(table.p(k_max + 1))
    return _interval_counts(table.primes, k_max, seg_odds=segment_odds)


def cumulative_pi(table: PrimeTable, k_max: int,
                  *, counts: np.ndarray | None = None) -> np.ndarray:
    """pi(p_{k+1}^2) for k = 1..k_max as a running sum over interval counts.

    pi(p_1^2) = pi(4) = 2 seeds the telescoping sum. Pass precomputed
    interval counts to skip the sieve.
    """
    if counts is None:
        counts = interval_counts(table, k_max)
    elif len(counts) < k_max:
        raise ValueError(f"need {k_max} interval counts, got {len(counts)}")
    return 2 + np.cumsum(counts[:k_max], dtype=np.int64)


def qr_first_positions(p: int) -> set[int]:
    """Candidate 1-based positions where a multiple of p first lands in a far interval.

    These are p - m + 1 for m ranging over the nonzero quadratic residues
    mod p; position 1 is excluded because the interval opens on a square.
    """
    if p < 2 or any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
        raise ValueError(f"{p} is not prime")
    residues = {(n * n) % p for n in range(1, p)}
    residues.discard(0)
    return {p - m + 1 for m in residues}
