"""Covariance of coprime-count windows and its aggregates over interval pairs.

G(n1, n2, h1, h2, q) is the covariance, over a uniformly shifted origin, of
the number of integers coprime to n1 in a window of length h1 and the number
coprime to n2 in a window of length h2 whose start lies q further right.
Three routes compute it: direct enumeration over the joint period, a
three-sum form built from divisor-weight windows (fast, works for primorial
moduli via prime lists), and a compact Moebius divisor sum. H(n, h) =
G(n, n, h, h, 0) is the single-window variance.

Only the squarefree kernel of a modulus matters to coprimality, so moduli
are reduced to their distinct primes; primorial moduli are never
materialized as integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .primes import CapacityError, PrimeTable, sieve_primes
from .stats import EULER_GAMMA, interval_lengths, li_at

ENUM_PERIOD_LIMIT = 10_000_000
COMPACT_MAX_PRIMES = 25


class UnsupportedModulusError(ValueError):
    """Raised when a formula path does not cover the given moduli."""


@lru_cache(maxsize=None)
def _first_primes(i: int) -> tuple[int, ...]:
    bound = 30 if i < 10 else int((i + 1) * (math.log(i + 1) + math.log(math.log(i + 1)))) + 10
    table = sieve_primes(bound)
    while len(table) < i:
        bound *= 2
        table = sieve_primes(bound)
    return tuple(int(p) for p in table.primes[:i])


def _factor_distinct(n: int) -> tuple[int, ...]:
    out, d, m = [], 2, n
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        out.append(m)
    return tuple(out)


@dataclass(frozen=True)
class Modulus:
    """A modulus known through its distinct primes; value kept only when small."""

    primes: tuple[int, ...]
    value: int | None
    label: str

    @classmethod
    def explicit(cls, n: int) -> "Modulus":
        if n < 1:
            raise ValueError(f"modulus must be >= 1, got {n}")
        return cls(primes=_factor_distinct(n), value=n, label=str(n))

    @classmethod
    def primorial(cls, i: int) -> "Modulus":
        if i < 1:
            raise ValueError(f"primorial index must be >= 1, got {i}")
        ps = _first_primes(i)
        value = None
        if i <= COMPACT_MAX_PRIMES:
            value = math.prod(ps)
        return cls(primes=ps, value=value, label=f"P#{i}")

    @property
    def radical(self) -> int | None:
        return math.prod(self.primes) if self.value is not None else None

    @property
    def is_even(self) -> bool:
        return bool(self.primes) and self.primes[0] == 2

    @property
    def odd_primes(self) -> tuple[int, ...]:
        return self.primes[1:] if self.is_even else self.primes

    @property
    def phi_ratio(self) -> float:
        return float(np.prod(1.0 - 1.0 / np.array(self.primes, dtype=np.longdouble)))

    def phi_ratio_exact(self) -> Fraction:
        out = Fraction(1)
        for p in self.primes:
            out *= Fraction(p - 1, p)
        return out

    def __str__(self) -> str:
        return self.label


def _as_modulus(n) -> Modulus:
    if isinstance(n, Modulus):
        return n
    return Modulus.explicit(int(n))


@dataclass(frozen=True)
class CovParams:
    """One covariance query: two moduli, window lengths, start separation."""

    n1: Modulus
    n2: Modulus
    h1: int
    h2: int
    q: int

    def __post_init__(self):
        object.__setattr__(self, "n1", _as_modulus(self.n1))
        object.__setattr__(self, "n2", _as_modulus(self.n2))
        if self.h1 < 1 or self.h2 < 1:
            raise ValueError("window lengths must be >= 1")
        if self.q < 0:
            raise ValueError("separation q must be >= 0")


# ---------------------------------------------------------------------------
# counting and enumeration

def count_coprime_window(n, m: int, h: int) -> int:
    """Number of r in [m, m+h-1] coprime to n."""
    mod = _as_modulus(n)
    count = 0
    for r in range(m, m + h):
        if all(r % p != 0 for p in mod.primes):
            count += 1
    return count


def _coprime_flags(mod: Modulus) -> np.ndarray:
    """f over one radical period; index r holds f(r) for r in [0, rad)."""
    rad = mod.radical
    f = np.ones(rad, dtype=np.int64)
    for p in mod.primes:
        f[::p] = 0
    return f


def _window_counts(mod: Modulus, h: int, period: int) -> np.ndarray:
    """F(m, h) for m = 0..period-1, from the tiled coprimality flags."""
    f = _coprime_flags(mod)
    ext = np.resize(f, period + h)
    c = np.concatenate(([0], np.cumsum(ext)))
    return c[h : period + h] - c[:period]


def g_enum(n1, n2, h1: int, h2: int, q: int, *, exact: bool = True):
    """Covariance by direct summation over the joint period (oracle path).

    Returns a Fraction in exact mode, float otherwise. Moduli must be
    explicit and have a joint radical period within enumeration reach.
    """
    m1, m2 = _as_modulus(n1), _as_modulus(n2)
    r1, r2 = m1.radical, m2.radical
    if r1 is None or r2 is None:
        raise UnsupportedModulusError("enumeration needs explicit moduli")
    period = r1 * r2
    if period > ENUM_PERIOD_LIMIT:
        raise CapacityError(f"joint period {period} exceeds enumeration limit")
    f1 = _window_counts(m1, h1, period)
    f2 = _window_counts(m2, h2, period)
    s = int(np.dot(f1, np.roll(f2, -q)))
    phi1 = sum(int(v) for v in _coprime_flags(m1))
    phi2 = sum(int(v) for v in _coprime_flags(m2))
    g = Fraction(s, period) - Fraction(h1 * h2 * phi1 * phi2, r1 * r2)
    return g if exact else float(g)


# ---------------------------------------------------------------------------
# combinatorial helpers of the divisor forms

def mobius(n: int) -> int:
    if n < 1:
        raise ValueError("mobius is defined for n >= 1")
    if n == 1:
        return 1
    sign, d, m = 1, 2, n
    while d * d <= m:
        if m % d == 0:
            m //= d
            if m % d == 0:
                return 0
            sign = -sign
        d += 1 if d == 2 else 2
    if m > 1:
        sign = -sign
    return sign


def rho_product(d: int) -> int:
    """rho(d) = prod over primes p | d of (p - 2), for squarefree d."""
    if mobius(d) == 0:
        raise ValueError(f"rho is defined for squarefree d, got {d}")
    return math.prod(p - 2 for p in _factor_distinct(d))


def q_factor(n1, n2) -> float:
    """Q(n1, n2) = (n1 n2 / 2) * prod over the asymmetric primes of (1 - 1/p)
    * prod over the shared odd primes of (1 - 2/p)."""
    m1, m2 = _as_modulus(n1), _as_modulus(n2)
    if m1.radical is None or m2.radical is None:
        raise UnsupportedModulusError("Q as a value needs explicit moduli")
    return float(m1.radical * m2.radical * _q_ratio(m1, m2, exact=True))


def _shared_odd(m1: Modulus, m2: Modulus) -> tuple[int, ...]:
    return tuple(sorted(set(m1.odd_primes) & set(m2.odd_primes)))


def _q_ratio(m1: Modulus, m2: Modulus, *, exact: bool = False):
    """Q(n1, n2) / (n1 n2) from prime lists alone."""
    s1, s2 = set(m1.primes), set(m2.primes)
    asym = sorted(s1 ^ s2)
    shared_odd = _shared_odd(m1, m2)
    if exact:
        out = Fraction(1, 2)
        for p in asym:
            out *= Fraction(p - 1, p)
        for p in shared_odd:
            out *= Fraction(p - 2, p)
        return out
    acc = np.longdouble(0.5)
    for p in asym:
        acc *= 1.0 - 1.0 / np.longdouble(p)
    for p in shared_odd:
        acc *= 1.0 - 2.0 / np.longdouble(p)
    return float(acc)


def frac_one(q: int, d: int):
    """{q/d} with the convention that exact multiples give 1, not 0."""
    if d < 1:
        raise ValueError("d must be >= 1")
    r = q % d
    return Fraction(r, d) if r else Fraction(1)


def gamma_plus(h: int, q: int, d: int) -> int:
    """1 when d | q + i for some 1 <= i <= d*{h/d}."""
    i0 = (-q - 1) % d + 1
    return 1 if i0 <= h % d else 0


def gamma_minus(h: int, q: int, d: int) -> int:
    """1 when d | q - i for some 1 <= i <= d*{h/d}."""
    i0 = (q - 1) % d + 1
    return 1 if i0 <= h % d else 0


# ---------------------------------------------------------------------------
# three-sum form

def _weight_window(shared_odd: tuple[int, ...], vmax: int) -> np.ndarray:
    """W[v] = prod over p in shared_odd with p | v of (1 + 1/(p-2)), v = 0..vmax.

    Index 0 picks up every prime (0 is divisible by all), which is exactly
    the convention the q = 0 variance specialization needs.
    """
    w = np.ones(vmax + 1, dtype=np.float64)
    for p in shared_odd:
        w[::p] *= 1.0 + 1.0 / (p - 2.0)
    return w


def _sum_even_linear_pos(w: np.ndarray, a: int, b: int, c0: float, c1: float) -> float:
    """Sum over even v in [a, b] (0 <= a) of (c0 + c1 v) * w[v]."""
    a0 = a + (a & 1)
    if a0 > b:
        return 0.0
    sl = w[a0 : b + 1 : 2]
    vs = a0 + 2.0 * np.arange(len(sl))
    return float(np.dot(sl, c0 + c1 * vs))


def _sum_even_linear(w: np.ndarray, a: int, b: int, c0: float, c1: float) -> float:
    """Same, allowing a < 0; weights read w[|v|]."""
    if a > b:
        return 0.0
    total = 0.0
    if a < 0:
        hi_neg = min(b, -1)
        total += _sum_even_linear_pos(w, -hi_neg, -a, c0, -c1)
        a = 0
    if a <= b:
        total += _sum_even_linear_pos(w, a, b, c0, c1)
    return total


def _threesum_core(w, h1: int, h2: int, q: int) -> float:
    """The three correlation sums over the divisor-weight window; h1 <= h2."""
    s_a = h1 * _sum_even_linear(w, q, q + h2 - h1, 1.0, 0.0)
    t0 = q + h2 - h1
    s_b = _sum_even_linear(w, t0 + 1, q + h2 - 1, float(h1 + t0), -1.0)
    s_c = _sum_even_linear(w, q - h1 + 1, q - 1, float(h1 - q), 1.0)
    return s_a + s_b + s_c


def _weight_exact(shared_odd, v: int) -> Fraction:
    out = Fraction(1)
    for p in shared_odd:
        if v % p == 0:
            out *= Fraction(p - 1, p - 2)
    return out


def _threesum_core_exact(shared_odd, h1: int, h2: int, q: int) -> Fraction:
    total = Fraction(0)
    for v in range(q, q + h2 - h1 + 1):
        if v % 2 == 0:
            total += h1 * _weight_exact(shared_odd, abs(v))
    t0 = q + h2 - h1
    for v in range(t0 + 1, q + h2):
        if v % 2 == 0:
            total += (h1 + t0 - v) * _weight_exact(shared_odd, abs(v))
    for v in range(q - h1 + 1, q):
        if v % 2 == 0:
            total += (h1 - q + v) * _weight_exact(shared_odd, abs(v))
    return total


def g_threesum(n1, n2, h1: int, h2: int, q: int, *, exact: bool = False):
    """Covariance via the three-sum form; both moduli must be even.

    Handles h1 > h2 through the exact window-swap identity
    G(n1,n2,h1,h2,q) = G(n2,n1,h2,h1,q+h2-h1), and any integer q (the
    divisor weights depend on |v| only).
    """
    m1, m2 = _as_modulus(n1), _as_modulus(n2)
    if not (m1.is_even and m2.is_even):
        raise UnsupportedModulusError("three-sum form needs both moduli even")
    if h1 > h2:
        m1, m2, h1, h2, q = m2, m1, h2, h1, q + h2 - h1
    shared_odd = _shared_odd(m1, m2)
    if exact:
        qr = _q_ratio(m1, m2, exact=True)
        s = _threesum_core_exact(shared_odd, h1, h2, q)
        return qr * s - h1 * h2 * m1.phi_ratio_exact() * m2.phi_ratio_exact()
    vmax = max(abs(q - h1 + 1), abs(q + h2 - 1), abs(q))
    w = _weight_window(shared_odd, vmax)
    s = _threesum_core(w, h1, h2, q)
    return _q_ratio(m1, m2) * s - h1 * h2 * m1.phi_ratio * m2.phi_ratio


# ---------------------------------------------------------------------------
# compact Moebius form

def _squarefree_divisors(primes: tuple[int, ...]):
    """(d, rho(d)) for every squarefree d built from the given primes."""
    out = [(1, 1)]
    for p in primes:
        out += [(d * p, r * (p - 2)) for d, r in out]
    return out


def _bracket_terms(h1: int, h2: int, q: int, d: int, *, exact: bool):
    m = 2 * d

    def fr(a: int):
        r = a % m
        return Fraction(r, m) if exact else r / m

    def fr1(a: int):
        r = a % m
        if r == 0:
            return Fraction(1) if exact else 1.0
        return Fraction(r, m) if exact else r / m

    one = Fraction(1) if exact else 1.0
    t = h1 * (one / m - fr(h2 - h1 + 1) + fr(q + h2 - h1) - fr1(q))
    t -= m * fr(h1) * (fr(h1) + fr(q + h2 - h1) - fr1(q))
    t += gamma_plus(h2 - h1 + 1, q - 1, m) * h1 * one
    t += gamma_plus(h1, q + h2 - h1, m) * m * (fr(h1) - (one - fr(q + h2 - h1)))
    t += gamma_minus(h1, q, m) * m * (fr(h1) - fr1(q))
    return t


def g_compact(n1, n2, h1: int, h2: int, q: int, *, exact: bool = False):
    """Covariance via the compact divisor sum over the shared odd primes.

    Requires both moduli even, h1 <= h2, and q >= 0; the divisor
    enumeration is exponential in the number of shared odd primes.
    """
    m1, m2 = _as_modulus(n1), _as_modulus(n2)
    if not (m1.is_even and m2.is_even):
        raise UnsupportedModulusError("compact form needs both moduli even")
    if h1 > h2:
        raise UnsupportedModulusError("compact form needs h1 <= h2")
    if q < 0:
        raise ValueError("compact form needs q >= 0")
    shared_odd = _shared_odd(m1, m2)
    if len(shared_odd) > COMPACT_MAX_PRIMES:
        raise CapacityError(
            f"{len(shared_odd)} shared odd primes; divisor enumeration too large"
        )
    total = Fraction(0) if exact else 0.0
    for d, rho in _squarefree_divisors(shared_odd):
        term = _bracket_terms(h1, h2, q, d, exact=exact)
        total += term / rho if not exact else Fraction(1, rho) * term
    qr = _q_ratio(m1, m2, exact=exact)
    return qr * total


# ---------------------------------------------------------------------------
# single-window variance

def h_variance(n, h: int, *, exact: bool = False):
    """H(n, h) = G(n, n, h, h, 0): variance of the coprime count in a window.

    Small moduli go through the Hausman-Shapiro divisor sum (the fractional
    parts fold over period 2d for even moduli, d for odd ones); primorial
    moduli with many primes reuse the three-sum specialization at q = 0.
    """
    if h < 1:
        raise ValueError("window length must be >= 1")
    mod = _as_modulus(n)
    odd = mod.odd_primes
    scale = 2 if mod.is_even else 1
    if len(odd) > 20:
        if not mod.is_even:
            raise UnsupportedModulusError("large odd moduli unsupported")
        return g_threesum(mod, mod, h, h, 0, exact=exact)
    if exact:
        front = Fraction(1)
        for p in odd:
            front *= Fraction(p - 2, p)
        total = Fraction(0)
        for d, rho in _squarefree_divisors(odd):
            fr = Fraction(h % (scale * d), scale * d)
            total += Fraction(d, rho) * fr * (1 - fr)
        return front * total
    front = float(np.prod([1.0 - 2.0 / p for p in odd])) if odd else 1.0
    total = 0.0
    for d, rho in _squarefree_divisors(odd):
        fr = (h % (scale * d)) / (scale * d)
        total += d / rho * fr * (1.0 - fr)
    return front * total


# ---------------------------------------------------------------------------
# aggregates over interval pairs

def _pair_separations(table: PrimeTable, i: int, j: int, separation: str) -> int:
    if separation == "trailing":
        return table.p(j + 1) ** 2 - table.p(i + 1) ** 2
    if separation == "leading":
        return table.p(j) ** 2 - table.p(i) ** 2
    raise ValueError(f"unknown separation convention {separation!r}")


def _density_products(table: PrimeTable, k_max: int):
    """Cumulative prod(1 - 1/p) and prod over odd p of (1 - 2/p), 1-based index."""
    ps = table.primes[:k_max].astype(np.longdouble)
    dens1 = np.concatenate(([np.longdouble(1.0)], np.cumprod(1.0 - 1.0 / ps)))
    f2 = 1.0 - 2.0 / ps
    f2[0] = 1.0  # p = 2 is not an odd prime
    dens2 = np.concatenate(([np.longdouble(1.0)], np.cumprod(f2)))
    return dens1, dens2


def interval_pair_cov(table: PrimeTable, k_max: int, *, max_lag: int | None = None,
                      separation: str = "leading") -> np.ndarray:
    """Matrix of G over interval pairs: entry [i, j] holds the covariance of
    the coprime counts in s_i and s_j (1 <= i < j <= k_max), zeros elsewhere.

    The divisor-weight window is sieved once per base index i and shared by
    every partner j, which keeps the all-pairs cost near the total window
    length.
    """
    table.require(k_max + 1)
    lengths = interval_lengths(table, k_max)
    l_max = int(lengths.max())
    dens1, dens2 = _density_products(table, k_max)
    out = np.zeros((k_max + 1, k_max + 1))
    odd_primes = [int(p) for p in table.primes[1:k_max]]
    for i in range(1, k_max):
        j_hi = k_max if max_lag is None else min(k_max, i + max_lag)
        if j_hi <= i:
            continue
        h1 = int(lengths[i - 1])
        vmax = _pair_separations(table, i, j_hi, separation) + l_max + h1
        w = _weight_window(tuple(odd_primes[: i - 1]), vmax)
        for j in range(i + 1, j_hi + 1):
            h2 = int(lengths[j - 1])
            q = _pair_separations(table, i, j, separation)
            a, b, qq = (h1, h2, q) if h1 <= h2 else (h2, h1, q + h2 - h1)
            s = _threesum_core(w, a, b, qq)
            q_ratio = 0.5 * float(dens1[j] / dens1[i] * dens2[i])
            out[i, j] = q_ratio * s - h1 * h2 * float(dens1[i] * dens1[j])
    return out


def kappa_theory(table: PrimeTable, k_max: int, lag: int, *,
                 separation: str = "leading") -> float:
    """Sum of pair covariances at fixed lag: sum_i G(s_i, s_{i+lag})."""
    if lag < 1 or lag >= k_max:
        raise ValueError("lag must satisfy 1 <= lag < k_max")
    cov = interval_pair_cov(table, k_max, max_lag=lag, separation=separation)
    idx = np.arange(1, k_max - lag + 1)
    return float(cov[idx, idx + lag].sum())


def h_variance_series(table: PrimeTable, k_max: int) -> np.ndarray:
    """H(p_j#, l_j) for j = 1..k_max (per-interval model variances)."""
    lengths = interval_lengths(table, k_max)
    dens2 = _density_products(table, k_max)[1]
    phi = np.cumprod(1.0 - 1.0 / table.primes[:k_max].astype(np.longdouble))
    out = np.empty(k_max)
    odd_primes = [int(p) for p in table.primes[1:k_max]]
    for j in range(1, k_max + 1):
        h = int(lengths[j - 1])
        w = _weight_window(tuple(odd_primes[: j - 1]), h)
        s = _threesum_core(w, h, h, 0)
        out[j - 1] = 0.5 * float(dens2[j]) * s - h * h * float(phi[j - 1]) ** 2
    return out


def var_uncorrelated_theory(table: PrimeTable, k_max: int) -> float:
    """Variance of the interval-sum count when translations redraw per interval."""
    return float(h_variance_series(table, k_max).sum())


def var_correlated_theory(table: PrimeTable, k_max: int, *,
                          separation: str = "leading") -> float:
    """Variance of the interval-sum count with shared translations: the
    per-interval variances plus twice the pair covariances."""
    pair = interval_pair_cov(table, k_max, separation=separation)
    return var_uncorrelated_theory(table, k_max) + 2.0 * float(pair.sum())


def sigma_upper_bound(table: PrimeTable, k_max: int) -> float:
    """sqrt(2 e^-gamma li(p_{K+1}^2)): deviation bound of the redrawn model."""
    return math.sqrt(2.0 * math.exp(-EULER_GAMMA) * li_at(table.p(k_max + 1) ** 2))


# ---------------------------------------------------------------------------
# method dispatch

def covariance(params: CovParams, method: str = "auto", *, exact: bool = False):
    """Evaluate one covariance query by the requested route."""
    p = params
    if method == "enum":
        return g_enum(p.n1, p.n2, p.h1, p.h2, p.q, exact=exact)
    if method == "threesum":
        return g_threesum(p.n1, p.n2, p.h1, p.h2, p.q, exact=exact)
    if method == "compact":
        return g_compact(p.n1, p.n2, p.h1, p.h2, p.q, exact=exact)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if p.n1.is_even and p.n2.is_even:
        return g_threesum(p.n1, p.n2, p.h1, p.h2, p.q, exact=exact)
    return g_enum(p.n1, p.n2, p.h1, p.h2, p.q, exact=exact)
