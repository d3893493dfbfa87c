"""Reproducible pipelines assembling the figure datasets.

Each experiment turns module outputs into one rectangular CSV plus a JSON
manifest; identical (config, seed) reproduce the CSV bit for bit. Columns
of different natural lengths (histogram bins, overlay grids) are padded
with empty cells so the file stays rectangular.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .primes import CapacityError, PrimeTable, interval_counts, table_for_k
from .stats import (
    DEFAULT_C,
    EULER_GAMMA,
    error_series,
    interval_lengths,
    li_at,
    li_interval_series,
    li_upper_series,
    log_ratio_sums,
    ms_series,
    normalized_series,
    tau_truncated,
    tilde_pi_series,
)
from .covariance import h_variance_series, interval_pair_cov, sigma_upper_bound
from .models import _draw_np, model_ensemble

FIGURE_IDS = (
    "ratios",
    "pik_curves",
    "ms_histogram",
    "error_functions",
    "normalized_error",
    "random_models",
    "covariance_sums",
    "stddev",
    "rh_bounds",
)

_DEFAULT_K = {
    "ratios": 1000,
    "pik_curves": 5000,
    "ms_histogram": 5000,
    "error_functions": 5000,
    "normalized_error": 5000,
    "random_models": 1000,
    "covariance_sums": 300,
    "stddev": 300,
    "rh_bounds": 5000,
}

_DEFAULT_REALIZATIONS = {
    "random_models": 30,
    "covariance_sums": 100,
    "stddev": 100,
}


@dataclass
class ExperimentConfig:
    figure_id: str
    k_max: int | None = None
    realizations: int | None = None
    seed: int = 20240601
    c: float = DEFAULT_C
    output_dir: str | Path | None = None
    d1: int = 10
    d2: int = 50

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure_id!r}")
        if self.k_max is None:
            self.k_max = _DEFAULT_K[self.figure_id]
        if self.realizations is None:
            self.realizations = _DEFAULT_REALIZATIONS.get(self.figure_id, 1)
        if self.k_max < 1 or self.realizations < 1:
            raise ValueError("k_max and realizations must be >= 1")


@dataclass
class FigureDataset:
    figure_id: str
    columns: dict  # name -> 1-d array or list
    manifest: dict = field(default_factory=dict)

    def csv_text(self) -> str:
        names = list(self.columns)
        cols = [_format_column(self.columns[n]) for n in names]
        depth = max(len(c) for c in cols)
        lines = [",".join(names)]
        for r in range(depth):
            lines.append(",".join(c[r] if r < len(c) else "" for c in cols))
        return "\n".join(lines) + "\n"

    def write(self, output_dir: str | Path) -> tuple[Path, Path]:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{self.figure_id}.csv"
        csv_path.write_text(self.csv_text())
        manifest_path = out / f"{self.figure_id}.manifest.json"
        with open(manifest_path, "w") as fh:
            json.dump(self.manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return csv_path, manifest_path


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if math.isnan(f):
        return "nan"
    return f"{f:.12g}"


def _format_column(col) -> list[str]:
    arr = np.asarray(col)
    if arr.dtype.kind in "iu":
        return [str(int(v)) for v in arr]
    return [_fmt(v) for v in arr]


def _normal_draws(seed: int, tag: int, n: int) -> np.ndarray:
    """Deterministic standard-normal draws from the counter-based generator."""
    idx = np.arange(1, n + 1, dtype=np.uint64)
    u1 = (_draw_np(seed, tag, 1, idx).astype(np.float64) + 0.5) / 2.0**64
    u2 = (_draw_np(seed, tag, 2, idx).astype(np.float64) + 0.5) / 2.0**64
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)


# ---------------------------------------------------------------------------
# shared per-run arrays

@dataclass
class RunData:
    table: PrimeTable
    k_max: int
    counts: np.ndarray
    lengths: np.ndarray
    x: np.ndarray          # p_{k+1}^2
    log_x: np.ndarray
    tilde: np.ndarray
    li_k: np.ndarray
    li_hi: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray


def compute_run_data(table: PrimeTable | None, k_max: int,
                     counts: np.ndarray | None = None) -> RunData:
    if table is None:
        table = table_for_k(k_max)
    if counts is None:
        counts = interval_counts(table, k_max)
    counts = np.asarray(counts[:k_max], dtype=np.int64)
    lengths = interval_lengths(table, k_max)
    x = table.primes[1 : k_max + 1].astype(np.float64) ** 2
    mu, sigma = ms_series(table, k_max)
    return RunData(
        table=table,
        k_max=k_max,
        counts=counts,
        lengths=lengths,
        x=x,
        log_x=np.log(x),
        tilde=tilde_pi_series(table, k_max),
        li_k=li_interval_series(table, k_max),
        li_hi=li_upper_series(table, k_max),
        mu=mu,
        sigma=sigma,
    )


# ---------------------------------------------------------------------------
# figure builders

def _build_ratios(cfg: ExperimentConfig, d: RunData) -> dict:
    base = d.lengths / d.log_x
    tau = tau_truncated(d.table, d.k_max)
    return {
        "x": d.x,
        "ratio_pi": d.counts / base,
        "ratio_tilde": d.tilde / base,
        "ratio_tau": tau / base,
    }


def _build_pik_curves(cfg: ExperimentConfig, d: RunData) -> dict:
    gaps = np.diff(d.table.primes[: d.k_max + 1])
    cols = {"x": d.x, "pi_k": d.counts, "gap": gaps}
    for g in sorted(set(int(v) for v in gaps)):
        cols[f"theory_g{g}"] = (2.0 * np.sqrt(d.x) * g - g * g) / d.log_x
    return cols


def _build_ms_histogram(cfg: ExperimentConfig, d: RunData) -> dict:
    pi_bar = normalized_series(d.table, d.counts)
    valid = np.flatnonzero(~np.isnan(pi_bar))
    values = pi_bar[valid]
    density, edges = np.histogram(values, bins="fd", density=True)
    z = np.linspace(-4.0, 4.0, 161)
    return {
        "k": valid + 1,
        "pi_bar": values,
        "bin_left": edges[:-1],
        "bin_right": edges[1:],
        "bin_density": density,
        "overlay_z": z,
        "overlay_pdf": np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi),
    }


def _build_error_functions(cfg: ExperimentConfig, d: RunData) -> dict:
    upper, lower = log_ratio_sums(d.table, d.k_max)
    cum_li = np.cumsum(d.li_k)
    cum_pi = 2 + np.cumsum(d.counts)
    sigma0 = np.where(np.isnan(d.sigma), 0.0, d.sigma)
    omega = sigma0 * _normal_draws(cfg.seed, 11, d.k_max)
    return {
        "x": d.x,
        "eps": cum_pi - d.li_hi,
        "upper_minus_li": upper - cum_li,
        "lower_minus_li": lower - cum_li,
        "omega_path": np.cumsum(omega),
    }


def _build_normalized_error(cfg: ExperimentConfig, d: RunData) -> dict:
    err = error_series(d.table, d.counts, cfg.c)
    upper, lower = log_ratio_sums(d.table, d.k_max)
    cum_li = np.cumsum(d.li_k)
    return {
        "k": np.arange(1, d.k_max + 1),
        "E": err.E,
        "norm_upper": (upper - cum_li) / err.delta_norm,
        "norm_lower": (lower - cum_li) / err.delta_norm,
    }


def _build_random_models(cfg: ExperimentConfig, d: RunData) -> dict:
    err = error_series(d.table, d.counts, cfg.c)
    cols = {"x": d.x, "eps": err.epsilon, "eps_adj": err.epsilon_adj}
    for model, short in (("correlated", "corr"), ("uncorrelated", "uncorr")):
        m = model_ensemble(model, d.table, d.k_max, cfg.realizations, cfg.seed)
        paths = np.cumsum(m - d.tilde, axis=1)
        for r in range(cfg.realizations):
            cols[f"{short}_{r:03d}"] = paths[r]
    return cols


def _lag_curves(pair: np.ndarray, k_max: int, d1: int, d2: int, prefix: str) -> dict:
    """Per-k lag sums and remainders from an upper-triangular pair matrix.

    pair[i, j] holds the (i, j) error product or covariance, 1-based, i < j.
    """
    cols = {}
    total = np.zeros(k_max + 1)
    for k in range(2, k_max + 1):
        total[k] = total[k - 1] + pair[1:k, k].sum()
    lag_cum = {}
    for lag in range(1, min(d2, k_max - 1) + 1):
        diag = np.zeros(k_max + 1)
        diag[lag + 1 :] = np.cumsum(pair.diagonal(lag)[1:])
        lag_cum[lag] = diag
    for lag in range(1, min(d1, k_max - 1) + 1):
        cols[f"{prefix}_j{lag}"] = lag_cum[lag][1:]
    for dd in (d1, d2):
        head = np.zeros(k_max + 1)
        for lag in range(1, min(dd, k_max - 1) + 1):
            head += lag_cum[lag]
        cols[f"{prefix}_rem_d{dd}"] = (total - head)[1:]
    return cols


def _pair_products(eps: np.ndarray) -> np.ndarray:
    """1-based (K+1)^2 matrix of mean error products across an ensemble."""
    n_real, k_max = eps.shape
    m = eps.T @ eps / n_real
    out = np.zeros((k_max + 1, k_max + 1))
    out[1:, 1:] = m
    return out


def _build_covariance_sums(cfg: ExperimentConfig, d: RunData) -> dict:
    err_pr = d.counts - d.li_k
    err_ad = d.counts - (cfg.c * d.li_k + (1.0 - cfg.c) * d.lengths / d.log_x)
    sim = model_ensemble("correlated", d.table, d.k_max, cfg.realizations, cfg.seed)
    eps_sim = sim - d.tilde
    cols = {"x": d.x}
    cols.update(_lag_curves(interval_pair_cov(d.table, d.k_max), d.k_max,
                            cfg.d1, cfg.d2, "th"))
    cols.update(_lag_curves(_pair_products(eps_sim), d.k_max, cfg.d1, cfg.d2, "sim"))
    cols.update(_lag_curves(_pair_products(err_pr[None, :]), d.k_max,
                            cfg.d1, cfg.d2, "pr"))
    cols.update(_lag_curves(_pair_products(err_ad[None, :]), d.k_max,
                            cfg.d1, cfg.d2, "ad"))
    return cols


def _build_stddev(cfg: ExperimentConfig, d: RunData) -> dict:
    err_pr = d.counts - d.li_k
    err_ad = d.counts - (cfg.c * d.li_k + (1.0 - cfg.c) * d.lengths / d.log_x)
    sim = model_ensemble("correlated", d.table, d.k_max, cfg.realizations, cfg.seed)
    eps_sim = sim - d.tilde
    paths = np.cumsum(eps_sim, axis=1)
    h_cum = np.cumsum(h_variance_series(d.table, d.k_max))
    pair = interval_pair_cov(d.table, d.k_max)
    pair_total = np.zeros(d.k_max)
    for k in range(2, d.k_max + 1):
        pair_total[k - 1] = pair_total[k - 2] + pair[1:k, k].sum()
    var_th = h_cum + 2.0 * pair_total
    return {
        "x": d.x,
        "sigma_th": np.sqrt(np.maximum(var_th, 0.0)),
        "sigma_sim": np.sqrt(np.mean(paths**2, axis=0)),
        "sigma_pr": np.abs(np.cumsum(err_pr)),
        "sigma_ad": np.abs(np.cumsum(err_ad)),
        "sigma_th_0": np.sqrt(h_cum),
        "sigma_sim_0": np.sqrt(np.mean(np.cumsum(eps_sim**2, axis=1), axis=0)),
        "sigma_pr_0": np.sqrt(np.cumsum(err_pr**2)),
        "sigma_ad_0": np.sqrt(np.cumsum(err_ad**2)),
        "sigma_ub": np.sqrt(2.0 * math.exp(-EULER_GAMMA) * d.li_hi),
    }


def _build_rh_bounds(cfg: ExperimentConfig, d: RunData) -> dict:
    cum_pi = 2 + np.cumsum(d.counts)
    eps = cum_pi - d.li_hi
    log_ratio = np.log(d.x / d.lengths)
    discrete = np.sqrt(np.cumsum(d.lengths * log_ratio / d.log_x**2))
    from .stats import B_NORMAL

    with_b = np.maximum(d.lengths * (log_ratio + B_NORMAL), 0.0)
    return {
        "x": d.x,
        "abs_eps": np.abs(eps),
        "discrete_bound": discrete,
        "discrete_bound_B": np.sqrt(np.cumsum(with_b / d.log_x**2)),
        "sumsq_pr": np.sqrt(np.cumsum((d.counts - d.li_k) ** 2)),
        "continuous_bound": np.sqrt(0.5 * d.li_hi),
        "uncorrelated_bound": np.sqrt(2.0 * math.exp(-EULER_GAMMA) * d.li_hi),
        "koch": np.sqrt(d.x) * np.log(d.x),
    }


_BUILDERS = {
    "ratios": _build_ratios,
    "pik_curves": _build_pik_curves,
    "ms_histogram": _build_ms_histogram,
    "error_functions": _build_error_functions,
    "normalized_error": _build_normalized_error,
    "random_models": _build_random_models,
    "covariance_sums": _build_covariance_sums,
    "stddev": _build_stddev,
    "rh_bounds": _build_rh_bounds,
}


def run_experiment(config: ExperimentConfig, *, table: PrimeTable | None = None,
                   counts: np.ndarray | None = None) -> FigureDataset:
    """Assemble one figure dataset; writes CSV + manifest when output_dir is set."""
    t0 = time.monotonic()
    truncated = False
    k_max = config.k_max
    if table is not None and k_max + 1 > len(table):
        k_max = len(table) - 1
        truncated = True
        config = replace(config, k_max=k_max)
    data = compute_run_data(table, k_max, counts)
    cols = _BUILDERS[config.figure_id](config, data)
    manifest = {
        "figure_id": config.figure_id,
        "K_max": k_max,
        "realizations": config.realizations,
        "seed": config.seed,
        "c": config.c,
        "d1": config.d1,
        "d2": config.d2,
        "truncated": truncated,
        "version": __version__,
        "columns": {name: len(np.asarray(col)) for name, col in cols.items()},
        "wall_time_s": round(time.monotonic() - t0, 3),
    }
    ds = FigureDataset(figure_id=config.figure_id, columns=cols, manifest=manifest)
    if config.output_dir is not None:
        ds.write(config.output_dir)
    return ds
