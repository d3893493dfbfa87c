"""Per-interval and cumulative estimators for prime counts in s_k.

Covers the Euler-product density, expected counts, Mertens error bounds,
the logarithmic integral, truncated Moebius sums, the normal-model
mean/deviation normalization, and the normalized global error series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import expi

from .primes import CapacityError, PrimeTable

EULER_GAMMA = float(np.euler_gamma)
# Mean-zero constant in the interval-count standard deviation: 1 - gamma - log(2*pi).
B_NORMAL = 1.0 - EULER_GAMMA - math.log(2.0 * math.pi)
# Limiting ratio of expected count to l / log p^2.
TWO_E_NEG_GAMMA = 2.0 * math.exp(-EULER_GAMMA)
# Default weight of li in the adjusted mean of pi; 1 - 0.604.
DEFAULT_C = 0.396

_LI_AT_2 = float(expi(math.log(2.0)))


@dataclass
class IntervalStats:
    k: int
    li_k: float
    tilde_pi_k: float
    mu_k: float
    sigma_k: float | None
    tau_k: float | None = None
    pi_bar_k: float | None = None


@dataclass
class ErrorSeries:
    """Global error pi - li and its normalized forms, indexed 1..K."""

    K: int
    epsilon: np.ndarray
    epsilon_adj: np.ndarray
    delta_norm: np.ndarray
    E: np.ndarray
    c: float


# ---------------------------------------------------------------------------
# geometry of the intervals

def interval_lengths(table: PrimeTable, k_max: int) -> np.ndarray:
    """l_k = p_{k+1}^2 - p_k^2 for k = 1..k_max."""
    table.require(k_max + 1)
    sq = table.primes[: k_max + 1].astype(np.int64) ** 2
    return np.diff(sq)


def _upper_squares(table: PrimeTable, k_max: int) -> np.ndarray:
    return table.primes[1 : k_max + 1].astype(np.float64) ** 2


# ---------------------------------------------------------------------------
# Euler products and expected counts

def euler_density_series(table: PrimeTable, k_max: int) -> np.ndarray:
    """prod_{p <= p_k} (1 - 1/p) for k = 1..k_max, accumulated in extended precision."""
    table.require(k_max)
    factors = 1.0 - 1.0 / table.primes[:k_max].astype(np.longdouble)
    return np.cumprod(factors).astype(np.float64)


def euler_density(table: PrimeTable, k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    return float(euler_density_series(table, k)[-1])


def tilde_pi_series(table: PrimeTable, k_max: int) -> np.ndarray:
    """Expected coprime count in a random window of length l_k, for k = 1..k_max."""
    return interval_lengths(table, k_max) * euler_density_series(table, k_max)


def tilde_pi_interval(table: PrimeTable, k: int) -> float:
    return float(tilde_pi_series(table, k)[-1])


def tilde_pi_at(table: PrimeTable, x: float) -> float:
    """Expected-count analogue of pi(x): full intervals plus a linear tail."""
    if x < 4:
        raise ValueError(f"x must be >= 4, got {x}")
    squares = table.primes.astype(np.float64) ** 2
    k = int(np.searchsorted(squares, x, side="right"))  # p_k^2 <= x < p_{k+1}^2
    if k >= len(table):
        raise CapacityError(f"x = {x} beyond the table's last squared prime")
    tilde = tilde_pi_series(table, k)
    frac = (x - squares[k - 1]) / (squares[k] - squares[k - 1])
    return float(tilde[:-1].sum() + frac * tilde[-1])


def mertens_delta_bound(x: float) -> float:
    """Upper bound on the Mertens product log-error at level sqrt(x)."""
    if x <= 1:
        raise ValueError(f"x must be > 1, got {x}")
    r = math.sqrt(x)
    return 4.0 / math.log(r + 1.0) + 2.0 / (r * math.log(r)) + 1.0 / (2.0 * r)


# ---------------------------------------------------------------------------
# logarithmic integral (lower limit 2)

def li_at(x: float) -> float:
    """li(x) = integral_2^x dt/log t, via the exponential integral."""
    if x < 2:
        raise ValueError(f"li is defined for x >= 2, got {x}")
    return float(expi(math.log(x))) - _LI_AT_2


def li_values(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 2):
        raise ValueError("li is defined for x >= 2")
    return expi(np.log(x)) - _LI_AT_2


def li_upper_series(table: PrimeTable, k_max: int) -> np.ndarray:
    """li(p_{k+1}^2) for k = 1..k_max."""
    return li_values(_upper_squares(table, k_max))


def li_interval(table: PrimeTable, k: int) -> float:
    """li over s_k."""
    table.require(k + 1)
    return li_at(table.p(k + 1) ** 2) - li_at(table.p(k) ** 2)


def li_interval_series(table: PrimeTable, k_max: int) -> np.ndarray:
    sq = table.primes[: k_max + 1].astype(np.float64) ** 2
    return np.diff(li_values(sq))


# ---------------------------------------------------------------------------
# truncated Moebius sums

_TAU_SEGMENT = 1 << 22


def _isqrt_array(d: np.ndarray) -> np.ndarray:
    s = np.sqrt(d.astype(np.float64)).astype(np.int64)
    s = np.where((s + 1) * (s + 1) <= d, s + 1, s)
    return np.where(s * s > d, s - 1, s)


def _tau_scan(table: PrimeTable, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """One segmented pass over [1, p_{k_max+1}^2) classifying every squarefree
    smooth d by the first k admitting it (largest prime factor <= p_k and
    d < p_{k+1}^2). Returns per-k buckets of mu(d)/d and of term counts."""
    table.require(k_max + 1)
    n_end = table.p(k_max + 1) ** 2
    if n_end > 1 << 40:
        raise CapacityError(f"tau sieve bound {n_end} is beyond desk scale")
    base = table.primes[:k_max]
    bucket = np.zeros(k_max + 1, dtype=np.longdouble)
    n_terms = np.zeros(k_max + 1, dtype=np.int64)
    for seg_lo in range(1, n_end, _TAU_SEGMENT):
        seg_hi = min(seg_lo + _TAU_SEGMENT, n_end)
        size = seg_hi - seg_lo
        rem = np.arange(seg_lo, seg_hi, dtype=np.int64)
        sign = np.ones(size, dtype=np.int8)
        sqf = np.ones(size, dtype=bool)
        lpf = np.zeros(size, dtype=np.int32)
        for i in range(len(base)):
            p = int(base[i])
            if p >= seg_hi:
                break
            first = (-seg_lo) % p
            sl = slice(first, None, p)
            rem[sl] //= p
            np.negative(sign[sl], out=sign[sl])
            lpf[sl] = i + 1
            p2 = p * p
            if p2 < seg_hi:
                sqf[(-seg_lo) % p2 :: p2] = False
        mask = sqf & (rem == 1)
        d = np.flatnonzero(mask).astype(np.int64) + seg_lo
        if len(d) == 0:
            continue
        k_min = np.searchsorted(table.primes, _isqrt_array(d), side="right")
        k_enter = np.maximum(np.maximum(lpf[mask], k_min), 1)
        keep = k_enter <= k_max
        contrib = sign[mask][keep].astype(np.float64) / d[keep]
        bucket[: k_max + 1] += np.bincount(
            k_enter[keep], weights=contrib, minlength=k_max + 1
        )
        n_terms += np.bincount(k_enter[keep], minlength=k_max + 1)
    return bucket, n_terms


def tau_truncated(table: PrimeTable, k_max: int) -> np.ndarray:
    """tau_k = l_k * sum of mu(d)/d over d | p_k# with d < p_{k+1}^2, k = 1..k_max."""
    bucket, _ = _tau_scan(table, k_max)
    running = np.cumsum(bucket[1:]).astype(np.float64)
    return interval_lengths(table, k_max) * running


def tau_term_counts(table: PrimeTable, k_max: int) -> np.ndarray:
    """Number of divisors admitted into the truncated sum at each k.

    This is the natural size of the truncation error term; it grows
    polynomially (measured exponent near 2.3) where the untruncated
    divisor sum has 2^k terms.
    """
    _, n_terms = _tau_scan(table, k_max)
    return np.cumsum(n_terms[1:])


def tau_truncated_exact(table: PrimeTable, k_max: int) -> list[Fraction]:
    """Exact-rational tau_k via the same incremental admission rule (small k only)."""
    if k_max > 12:
        raise CapacityError("exact mode enumerates every integer below p_{k+1}^2")
    table.require(k_max + 1)
    n_end = table.p(k_max + 1) ** 2
    base = [table.p(i) for i in range(1, k_max + 1)]
    bucket = [Fraction(0)] * (k_max + 1)
    for d in range(1, n_end):
        rem, sign, sqf, lpf_idx = d, 1, True, 0
        for i, p in enumerate(base):
            if rem % p == 0:
                rem //= p
                sign = -sign
                lpf_idx = i + 1
                if rem % p == 0:
                    sqf = False
                    break
        if not sqf or rem != 1:
            continue
        k_min = 0
        while k_min < len(table) and table.p(k_min + 1) ** 2 <= d:
            k_min += 1
        k_enter = max(lpf_idx, k_min, 1)
        if k_enter <= k_max:
            bucket[k_enter] += Fraction(sign, d)
    out, running = [], Fraction(0)
    for k in range(1, k_max + 1):
        running += bucket[k]
        l_k = table.p(k + 1) ** 2 - table.p(k) ** 2
        out.append(l_k * running)
    return out


# ---------------------------------------------------------------------------
# normal-model normalization

def ms_mean(table: PrimeTable, k: int) -> float:
    """mu_k = l_k / log p_{k+1}^2."""
    table.require(k + 1)
    l_k = table.p(k + 1) ** 2 - table.p(k) ** 2
    return l_k / math.log(float(table.p(k + 1)) ** 2)


def ms_std(table: PrimeTable, k: int) -> float | None:
    """sigma_k; absent when the variance argument log(p_{k+1}^2 / l_k) + B <= 0."""
    table.require(k + 1)
    sq = float(table.p(k + 1)) ** 2
    l_k = table.p(k + 1) ** 2 - table.p(k) ** 2
    radicand = l_k * (math.log(sq / l_k) + B_NORMAL)
    if radicand <= 0:
        return None
    return math.sqrt(radicand) / math.log(sq)


def ms_series(table: PrimeTable, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """(mu, sigma) for k = 1..k_max; sigma is NaN where degenerate."""
    lengths = interval_lengths(table, k_max).astype(np.float64)
    log_sq = np.log(_upper_squares(table, k_max))
    mu = lengths / log_sq
    radicand = lengths * (np.log(_upper_squares(table, k_max) / lengths) + B_NORMAL)
    sigma = np.full(k_max, np.nan)
    ok = radicand > 0
    sigma[ok] = np.sqrt(radicand[ok]) / log_sq[ok]
    return mu, sigma


def normalize_pi(table: PrimeTable, k: int, pi_k: int) -> float | None:
    """(pi_k - mu_k) / sigma_k, or None where sigma_k is absent."""
    sigma = ms_std(table, k)
    if sigma is None:
        return None
    return (pi_k - ms_mean(table, k)) / sigma


def normalized_series(table: PrimeTable, counts: np.ndarray) -> np.ndarray:
    """Normalized counts for k = 1..len(counts); NaN where sigma_k is absent."""
    mu, sigma = ms_series(table, len(counts))
    with np.errstate(invalid="ignore"):
        return (np.asarray(counts, dtype=np.float64) - mu) / sigma


# ---------------------------------------------------------------------------
# global error series

def log_ratio_sums(table: PrimeTable, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative sums of l_j/log p_j^2 (upper) and l_j/log p_{j+1}^2 (lower)."""
    lengths = interval_lengths(table, k_max).astype(np.longdouble)
    lo_sq = table.primes[:k_max].astype(np.longdouble) ** 2
    hi_sq = table.primes[1 : k_max + 1].astype(np.longdouble) ** 2
    upper = np.cumsum(lengths / np.log(lo_sq)).astype(np.float64)
    lower = np.cumsum(lengths / np.log(hi_sq)).astype(np.float64)
    return upper, lower


def error_series(table: PrimeTable, counts: np.ndarray, c: float = DEFAULT_C) -> ErrorSeries:
    """epsilon, adjusted epsilon, the normalization scale Delta, and E = epsilon/Delta.

    counts holds the exact interval counts for k = 1..K. The adjusted mean
    is the convex combination c*li + (1-c)*sum(l/log p_{k+1}^2).
    """
    k_max = len(counts)
    cum_pi = 2 + np.cumsum(np.asarray(counts, dtype=np.int64))
    li_hi = li_upper_series(table, k_max)
    upper, lower = log_ratio_sums(table, k_max)
    eps = cum_pi - li_hi
    delta = 0.5 * (upper - lower)
    adjusted = c * li_hi + (1.0 - c) * lower
    return ErrorSeries(
        K=k_max,
        epsilon=eps,
        epsilon_adj=cum_pi - adjusted,
        delta_norm=delta,
        E=eps / delta,
        c=c,
    )


def interval_stats(table: PrimeTable, k: int, pi_k: int | None = None,
                   tau_k: float | None = None) -> IntervalStats:
    """Bundle the derived per-interval quantities for one k."""
    sigma = ms_std(table, k)
    pi_bar = None
    if pi_k is not None and sigma is not None:
        pi_bar = (pi_k - ms_mean(table, k)) / sigma
    return IntervalStats(
        k=k,
        li_k=li_interval(table, k),
        tilde_pi_k=tilde_pi_interval(table, k),
        mu_k=ms_mean(table, k),
        sigma_k=sigma,
        tau_k=tau_k,
        pi_bar_k=pi_bar,
    )
