"""Stochastic models of the interval prime counts.

Three models share one mechanism, counting positions in each interval s_k
missed by every marking progression:

- correlated: each prime p_i gets one random translation m_i, reused across
  all intervals, so neighbouring intervals stay correlated;
- uncorrelated: translations are redrawn independently for every interval;
- constrained: within each interval the first position hit by p_i is drawn
  from its quadratic-residue candidate set, later hits follow with period p_i.

Randomness is counter-based: a splitmix64 finalizer chain hashes
(seed, realization, interval, prime index) to 64 bits, reduced mod p.
Draws are therefore reproducible, order-independent, and identical across
platforms and thread counts.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit, prange

from .primes import PrimeTable, qr_first_positions
from .stats import EULER_GAMMA, interval_lengths, tilde_pi_series

MODELS = ("correlated", "uncorrelated", "constrained")

_C_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_C_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_C_MIX2 = np.uint64(0x94D049BB133111EB)
_SALT_R = np.uint64(0xD1B54A32D192ED03)
_SALT_J = np.uint64(0x8CB92BA72F3D8DD7)
_SALT_I = np.uint64(0xABC98388FB8FAC03)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)


@njit(cache=True, inline="always")
def _fin(z):
    z = z + _C_GAMMA
    z = (z ^ (z >> _S30)) * _C_MIX1
    z = (z ^ (z >> _S27)) * _C_MIX2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _draw(seed, realization, interval, slot):
    w = _fin(np.uint64(seed))
    w = _fin(w + _SALT_R * np.uint64(realization))
    w = _fin(w + _SALT_J * np.uint64(interval))
    return _fin(w + _SALT_I * np.uint64(slot))


def _draw_np(seed: int, realization: int, interval, slot) -> np.ndarray:
    """Vectorized mirror of _draw for test hooks and offset materialization."""

    def fin(z):
        z = z + _C_GAMMA
        z = (z ^ (z >> _S30)) * _C_MIX1
        z = (z ^ (z >> _S27)) * _C_MIX2
        return z ^ (z >> _S31)

    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        w = fin(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
        w = fin(w + _SALT_R * np.uint64(realization))
        w = fin(w + _SALT_J * np.asarray(interval, dtype=np.uint64))
        return fin(w + _SALT_I * np.asarray(slot, dtype=np.uint64))


@dataclass
class OffsetAssignment:
    """Translations m_i in [0, p_i) for the first K primes, one realization."""

    K: int
    offsets: np.ndarray
    seed: int


@dataclass
class RealizationSeries:
    """Per-interval counts from one model realization."""

    model: str
    K: int
    counts: np.ndarray
    seed: int
    realization: int = 0


def offset_assignment(table: PrimeTable, k_max: int, seed: int,
                      realization: int = 0) -> OffsetAssignment:
    """The shared translations a correlated realization uses."""
    table.require(k_max)
    primes = table.primes[:k_max].astype(np.uint64)
    slots = np.arange(1, k_max + 1, dtype=np.uint64)
    words = _draw_np(seed, realization, 0, slots)
    return OffsetAssignment(K=k_max, offsets=(words % primes).astype(np.int64), seed=seed)


@njit(cache=True)
def _count_one(primes, k_max, seed, realization, per_interval, offsets, use_offsets,
               buf, out):
    """Counts for intervals 1..k_max of one realization; buf is stamped with
    the interval index instead of being cleared (callers pass a fresh buffer
    per realization)."""
    for j in range(1, k_max + 1):
        lo = primes[j - 1] * primes[j - 1]
        length = primes[j] * primes[j] - lo
        marked = 0
        for i in range(1, j + 1):
            p = primes[i - 1]
            if use_offsets:
                m = offsets[i - 1]
            else:
                key = j if per_interval else 0
                m = np.int64(_draw(seed, realization, key, i) % np.uint64(p))
            t = (-(lo + m)) % p
            while t < length:
                if buf[t] != j:
                    buf[t] = j
                    marked += 1
                t += p
        out[j - 1] = length - marked


@njit(cache=True, parallel=True)
def _ensemble(primes, k_max, seed, n_real, per_interval):
    l_max = np.int64(0)
    for j in range(k_max):
        l = primes[j + 1] * primes[j + 1] - primes[j] * primes[j]
        if l > l_max:
            l_max = l
    out = np.empty((n_real, k_max), dtype=np.int64)
    dummy = np.zeros(1, dtype=np.int64)
    for r in prange(n_real):
        buf = np.zeros(l_max, dtype=np.int64)
        _count_one(primes, k_max, seed, r, per_interval, dummy, False, buf, out[r])
    return out


@njit(cache=True)
def _counts_fixed(primes, k_max, offsets):
    l_max = np.int64(0)
    for j in range(k_max):
        l = primes[j + 1] * primes[j + 1] - primes[j] * primes[j]
        if l > l_max:
            l_max = l
    out = np.empty(k_max, dtype=np.int64)
    buf = np.zeros(l_max, dtype=np.int64)
    _count_one(primes, k_max, 0, 0, False, offsets, True, buf, out)
    return out


@njit(cache=True)
def _constrained_one(primes, k_max, seed, realization, cand_flat, cand_ptr, pin_last,
                     buf, out):
    for k in range(1, k_max + 1):
        lo = primes[k - 1] * primes[k - 1]
        length = primes[k] * primes[k] - lo
        marked = 0
        for i in range(1, k + 1):
            p = primes[i - 1]
            if pin_last and i == k:
                t = np.int64(0)  # the opening square occupies position 1
            else:
                n_cand = cand_ptr[i] - cand_ptr[i - 1]
                pick = _draw(seed, realization, k, i) % np.uint64(n_cand)
                t = cand_flat[cand_ptr[i - 1] + np.int64(pick)] - 1
            while t < length:
                if buf[t] != k:
                    buf[t] = k
                    marked += 1
                t += p
        out[k - 1] = length - marked


@njit(cache=True, parallel=True)
def _constrained_ensemble(primes, k_max, seed, n_real, cand_flat, cand_ptr, pin_last):
    l_max = np.int64(0)
    for j in range(k_max):
        l = primes[j + 1] * primes[j + 1] - primes[j] * primes[j]
        if l > l_max:
            l_max = l
    out = np.empty((n_real, k_max), dtype=np.int64)
    for r in prange(n_real):
        buf = np.zeros(l_max, dtype=np.int64)
        _constrained_one(primes, k_max, seed, r, cand_flat, cand_ptr, pin_last,
                         buf, out[r])
    return out


def _candidate_table(table: PrimeTable, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Flattened quadratic-residue first-appearance candidates for p_1..p_{k_max}."""
    flat, ptr = [], [0]
    for i in range(1, k_max + 1):
        flat.extend(sorted(qr_first_positions(table.p(i))))
        ptr.append(len(flat))
    return np.array(flat, dtype=np.int64), np.array(ptr, dtype=np.int64)


def model_ensemble(model: str, table: PrimeTable, k_max: int, realizations: int,
                   seed: int, *, pin_last: bool = False) -> np.ndarray:
    """Counts matrix (realizations x k_max); row r is realization index r.

    pin_last applies to the constrained model only: it forces the last
    prime's first appearance to position 1 (the opening square) instead of
    sampling it like the others. Sampling every sequence is what produces
    the documented upward bias of the constrained counts.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    table.require(k_max + 1)
    if model == "constrained":
        cand_flat, cand_ptr = _candidate_table(table, k_max)
        return _constrained_ensemble(table.primes, k_max, seed, realizations,
                                     cand_flat, cand_ptr, pin_last)
    return _ensemble(table.primes, k_max, seed, realizations,
                     model == "uncorrelated")


def realize_correlated(table: PrimeTable, k_max: int, seed: int, *,
                       realization: int = 0,
                       offsets: np.ndarray | None = None) -> RealizationSeries:
    """One correlated realization; pass explicit offsets as a test hook
    (all-zero translations reproduce the primes exactly)."""
    table.require(k_max + 1)
    if offsets is not None:
        offsets = np.asarray(offsets, dtype=np.int64)
        if len(offsets) < k_max:
            raise ValueError(f"need {k_max} offsets, got {len(offsets)}")
        counts = _counts_fixed(table.primes, k_max, offsets)
    else:
        counts = _one_realization("correlated", table, k_max, seed, realization)
    return RealizationSeries("correlated", k_max, counts, seed, realization)


def _one_realization(model: str, table: PrimeTable, k_max: int, seed: int,
                     realization: int, pin_last: bool = False) -> np.ndarray:
    if model == "constrained":
        cand_flat, cand_ptr = _candidate_table(table, k_max)
        out = np.empty(k_max, dtype=np.int64)
        buf = np.zeros(int(interval_lengths(table, k_max).max()), dtype=np.int64)
        _constrained_one(table.primes, k_max, seed, realization, cand_flat, cand_ptr,
                         pin_last, buf, out)
        return out
    out = np.empty(k_max, dtype=np.int64)
    buf = np.zeros(int(interval_lengths(table, k_max).max()), dtype=np.int64)
    _count_one(table.primes, k_max, seed, realization, model == "uncorrelated",
               np.zeros(1, dtype=np.int64), False, buf, out)
    return out


def realize_uncorrelated(table: PrimeTable, k_max: int, seed: int, *,
                         realization: int = 0) -> RealizationSeries:
    table.require(k_max + 1)
    counts = _one_realization("uncorrelated", table, k_max, seed, realization)
    return RealizationSeries("uncorrelated", k_max, counts, seed, realization)


def realize_constrained(table: PrimeTable, k_max: int, seed: int, *,
                        realization: int = 0,
                        pin_last: bool = False) -> RealizationSeries:
    table.require(k_max + 1)
    counts = _one_realization("constrained", table, k_max, seed, realization, pin_last)
    return RealizationSeries("constrained", k_max, counts, seed, realization)


def mean_corrected(series: RealizationSeries) -> np.ndarray:
    """Counts rescaled by e^gamma / 2 so the model mean matches l/log p^2."""
    return series.counts * (math.exp(EULER_GAMMA) / 2.0)


@dataclass
class EnsembleStats:
    """Ensemble moments of the per-interval errors count - expected count."""

    model: str
    K: int
    realizations: int
    mean: np.ndarray        # per-interval ensemble mean of the counts
    var: np.ndarray         # per-interval ensemble variance
    kappa: np.ndarray       # kappa[j] = <sum_i eps_i eps_{i+j}>, j = 0..K-1
    var_total: float        # <(sum eps)^2>
    var_diag: float         # <sum eps^2>


def ensemble_stats(counts: np.ndarray, table: PrimeTable,
                   model: str = "unknown") -> EnsembleStats:
    """Lagged error products and variance estimates across an ensemble.

    counts is the (R x K) matrix from model_ensemble (a single realization
    may be passed as shape (1, K)).
    """
    counts = np.atleast_2d(np.asarray(counts))
    if counts.size == 0:
        raise ValueError("ensemble is empty")
    n_real, k_max = counts.shape
    eps = counts.astype(np.float64) - tilde_pi_series(table, k_max)
    kappa = np.zeros(k_max)
    for r in range(n_real):
        full = np.correlate(eps[r], eps[r], mode="full")
        kappa += full[k_max - 1 :]
    kappa /= n_real
    sums = eps.sum(axis=1)
    return EnsembleStats(
        model=model,
        K=k_max,
        realizations=n_real,
        mean=counts.mean(axis=0),
        var=counts.var(axis=0),
        kappa=kappa,
        var_total=float(np.mean(sums**2)),
        var_diag=float(np.mean((eps**2).sum(axis=1))),
    )


# ---------------------------------------------------------------------------
# serialization

def write_series_csv(series: RealizationSeries, path: str | Path) -> None:
    """CSV of (k, count) plus a JSON sidecar describing the run."""
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("k,count\n")
        for k, c in enumerate(series.counts, start=1):
            fh.write(f"{k},{int(c)}\n")
    sidecar = {"model": series.model, "seed": series.seed, "K": series.K,
               "realization": series.realization}
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_series_csv(path: str | Path) -> RealizationSeries:
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    with open(path.with_suffix(".json")) as fh:
        meta = json.load(fh)
    return RealizationSeries(
        model=meta["model"], K=meta["K"], counts=data[:, 1].copy(),
        seed=meta["seed"], realization=meta.get("realization", 0),
    )
