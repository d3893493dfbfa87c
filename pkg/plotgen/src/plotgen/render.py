"""Deterministic figure rendering from experiment CSVs.

The renderer never recomputes statistics: histogram bars come from the
stored bin edges, overlays from the stored overlay columns, reference
lines are fixed annotation constants. Identical inputs produce
byte-identical SVG/PNG output (fixed size, salted ids, no timestamps).
"""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class RenderError(Exception):
    """Input does not match the figure schema (missing columns, NaNs, ...)."""


# required / optional column sets per figure id; patterns match families
SCHEMAS = {
    "ratios": (["x", "ratio_pi", "ratio_tilde"], ["ratio_tau"]),
    "pik_curves": (["x", "pi_k", "gap"], [r"theory_g\d+"]),
    "ms_histogram": (
        ["k", "pi_bar", "bin_left", "bin_right", "bin_density",
         "overlay_z", "overlay_pdf"], []),
    "error_functions": (["x", "eps", "upper_minus_li", "lower_minus_li"],
                        ["omega_path"]),
    "normalized_error": (["k", "E"], ["norm_upper", "norm_lower"]),
    "random_models": (["x", "eps", "eps_adj"], [r"corr_\d+", r"uncorr_\d+"]),
    "covariance_sums": (["x", "th_j1", "sim_j1", "pr_j1", "ad_j1"],
                        [r"(th|sim|pr|ad)_(j\d+|rem_d\d+)"]),
    "stddev": (["x", "sigma_th", "sigma_sim", "sigma_pr", "sigma_ad",
                "sigma_th_0", "sigma_sim_0", "sigma_pr_0", "sigma_ad_0",
                "sigma_ub"], []),
    "rh_bounds": (["x", "abs_eps", "discrete_bound", "continuous_bound",
                   "uncorrelated_bound", "koch"],
                  ["discrete_bound_B", "sumsq_pr"]),
}

_STYLE = {
    "figure.figsize": (8.0, 5.0),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "svg.hashsalt": "plotgen",
    "svg.fonttype": "path",
    "axes.grid": True,
    "grid.alpha": 0.25,
    "font.size": 9,
}


@dataclass
class PlotSpec:
    figure_id: str
    input_csv: str | Path
    output_path: str | Path
    image_format: str = "svg"
    log_y: bool | None = None  # default: log axis for rh_bounds only

    def __post_init__(self):
        if self.figure_id not in SCHEMAS:
            raise RenderError(f"unknown figure id {self.figure_id!r}")
        if self.image_format not in ("svg", "png"):
            raise RenderError(f"unsupported format {self.image_format!r}")


def read_columns(path: str | Path) -> dict[str, np.ndarray]:
    """Parse a rectangular padded CSV into per-column float arrays.

    Trailing empty cells (padding of short columns) are dropped; empty
    columns come back with length zero.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise RenderError(f"{path}: empty file")
    names = rows[0]
    cols: dict[str, np.ndarray] = {}
    for j, name in enumerate(names):
        vals = []
        for row in rows[1:]:
            cell = row[j] if j < len(row) else ""
            if cell == "":
                continue
            vals.append(float("nan") if cell == "nan" else float(cell))
        cols[name] = np.array(vals, dtype=np.float64)
    return cols


def check_schema(figure_id: str, cols: dict[str, np.ndarray]) -> None:
    required, optional_patterns = SCHEMAS[figure_id]
    missing = [name for name in required if name not in cols or len(cols[name]) == 0]
    known = set(required)
    unexpected = []
    for name in cols:
        if name in known:
            continue
        if any(re.fullmatch(pat, name) for pat in optional_patterns):
            continue
        unexpected.append(name)
    if missing:
        raise RenderError(
            f"{figure_id}: column mismatch; missing {missing}"
            + (f", unexpected {unexpected}" if unexpected else "")
        )
    for name in required:
        if np.isnan(cols[name]).any():
            raise RenderError(f"{figure_id}: NaN in required column {name!r}")


def _series(cols, pattern):
    return sorted(n for n in cols if re.fullmatch(pattern, n) and len(cols[n]))


def _plot_ratios(ax, cols):
    ax.plot(cols["x"], cols["ratio_pi"], lw=0.7, color="k", label="exact counts")
    ax.plot(cols["x"], cols["ratio_tilde"], lw=0.9, color="tab:blue",
            label="expected counts")
    if len(cols.get("ratio_tau", ())):
        ax.plot(cols["x"], cols["ratio_tau"], lw=0.9, color="tab:green",
                label="truncated sum")
    for level in (1.0, 1.03, 2.0 * math.exp(-float(np.euler_gamma))):
        ax.axhline(level, color="0.4", lw=0.6, ls="--")
    ax.set_xscale("log")
    ax.set_xlabel("x = p_{k+1}^2")
    ax.set_ylabel("ratio to l / log p^2")
    ax.legend(loc="upper right")


def _plot_pik_curves(ax, cols):
    ax.plot(cols["x"], cols["pi_k"], ".", ms=1.5, color="k", label="interval counts")
    for name in _series(cols, r"theory_g\d+"):
        ax.plot(cols["x"], cols[name], lw=0.8, color="tab:red")
    ax.set_xlabel("x = p_{k+1}^2")
    ax.set_ylabel("primes per interval")
    ax.legend(loc="upper left")


def _plot_ms_histogram(ax, cols):
    width = cols["bin_right"] - cols["bin_left"]
    ax.bar(cols["bin_left"], cols["bin_density"], width=width, align="edge",
           color="tab:blue", alpha=0.6, label="normalized counts")
    line, = ax.plot(cols["overlay_z"], cols["overlay_pdf"], color="k", lw=1.2,
                    label="standard normal")
    line.set_gid("normal-overlay")
    ax.set_xlabel("normalized interval count")
    ax.set_ylabel("density")
    ax.legend(loc="upper right")


def _plot_error_functions(ax, cols):
    ax.plot(cols["x"], cols["eps"], color="k", lw=0.9, label="pi - li")
    ax.plot(cols["x"], cols["upper_minus_li"], color="tab:red", lw=0.9,
            label="upper sum - li")
    ax.plot(cols["x"], cols["lower_minus_li"], color="tab:blue", lw=0.9,
            label="lower sum - li")
    if len(cols.get("omega_path", ())):
        ax.plot(cols["x"], cols["omega_path"], color="0.6", lw=0.7,
                label="independent noise")
    ax.set_xlabel("x = p_{k+1}^2")
    ax.set_ylabel("count difference")
    ax.legend(loc="lower left")


def _plot_normalized_error(ax, cols):
    ax.plot(cols["k"], cols["E"], color="k", lw=0.8, label="E_k")
    for name, color in (("norm_upper", "tab:red"), ("norm_lower", "tab:blue")):
        if len(cols.get(name, ())):
            ax.plot(cols["k"], cols[name], color=color, lw=0.8, label=name)
    ax.axhline(-0.6, color="0.4", lw=0.6, ls="--")
    ax.set_xlabel("k")
    ax.set_ylabel("normalized error")
    ax.legend(loc="lower right")


def _plot_random_models(ax, cols):
    for name in _series(cols, r"uncorr_\d+"):
        ax.plot(cols["x"], cols[name], color="0.75", lw=0.5)
    for name in _series(cols, r"corr_\d+"):
        ax.plot(cols["x"], cols[name], color="tab:red", lw=0.5, alpha=0.7)
    ax.plot(cols["x"], cols["eps"], color="k", lw=1.1, label="pi - li")
    ax.plot(cols["x"], cols["eps_adj"], color="tab:blue", lw=1.1,
            label="adjusted error")
    ax.set_xlabel("x = p_{k+1}^2")
    ax.set_ylabel("centered paths")
    ax.legend(loc="lower left")


_SOURCE_COLORS = {"th": "k", "sim": "tab:red", "pr": "tab:blue", "ad": "tab:green"}


def _plot_covariance_sums(ax, cols):
    for src, color in _SOURCE_COLORS.items():
        for name in _series(cols, rf"{src}_j\d+"):
            lag = int(name.split("_j")[1])
            ax.plot(cols["x"], cols[name], color=color, lw=0.7,
                    alpha=max(0.25, 1.0 - 0.12 * lag),
                    label=f"{src} lag sums" if lag == 1 else None)
        for name in _series(cols, rf"{src}_rem_d\d+"):
            ax.plot(cols["x"], cols[name], color=color, lw=0.9, ls="--")
    ax.set_xlabel("x = p_{k+1}^2")
    ax.set_ylabel("covariance sums")
    ax.legend(loc="lower left")


def _plot_stddev(ax, cols):
    styles = [
        ("sigma_ub", "0.3", "--"), ("sigma_th", "k", "-"),
        ("sigma_sim", "tab:red", "-"), ("sigma_pr", "tab:blue", "-"),
        ("sigma_ad", "tab:green", "-"), ("sigma_th_0", "k", ":"),
        ("sigma_sim_0", "tab:red", ":"), ("sigma_pr_0", "tab:blue", ":"),
        ("sigma_ad_0", "tab:green", ":"),
    ]
    for name, color, ls in styles:
        ax.plot(cols["x"], cols[name], color=color, ls=ls, lw=0.9, label=name)
    ax.set_xlabel("x = p_{k+1}^2")
    ax.set_ylabel("standard deviation")
    ax.legend(loc="upper left", ncols=3)


def _plot_rh_bounds(ax, cols):
    series = [
        ("abs_eps", "k", "|pi - li|"),
        ("discrete_bound", "tab:blue", "discrete bound"),
        ("continuous_bound", "tab:green", "sqrt(li/2)"),
        ("uncorrelated_bound", "tab:orange", "sqrt(2 e^-g li)"),
        ("koch", "tab:red", "sqrt(x) log x"),
    ]
    for name, color, label in series:
        ax.plot(cols["x"], cols[name], color=color, lw=0.9, label=label)
    for name, color in (("discrete_bound_B", "tab:purple"), ("sumsq_pr", "0.5")):
        if len(cols.get(name, ())):
            ax.plot(cols["x"], cols[name], color=color, lw=0.7, ls=":", label=name)
    ax.set_xlabel("x = p_{k+1}^2")
    ax.set_ylabel("error / bound")
    ax.legend(loc="upper left")


_PLOTTERS = {
    "ratios": _plot_ratios,
    "pik_curves": _plot_pik_curves,
    "ms_histogram": _plot_ms_histogram,
    "error_functions": _plot_error_functions,
    "normalized_error": _plot_normalized_error,
    "random_models": _plot_random_models,
    "covariance_sums": _plot_covariance_sums,
    "stddev": _plot_stddev,
    "rh_bounds": _plot_rh_bounds,
}


def build_figure(spec: PlotSpec, cols: dict[str, np.ndarray]):
    """Validated matplotlib figure for a spec; caller owns closing it."""
    check_schema(spec.figure_id, cols)
    with matplotlib.rc_context(_STYLE):
        fig, ax = plt.subplots()
        _PLOTTERS[spec.figure_id](ax, cols)
        log_y = spec.log_y if spec.log_y is not None else spec.figure_id == "rh_bounds"
        if log_y:
            ax.set_yscale("log")
        ax.set_title(spec.figure_id)
        fig.tight_layout()
    return fig


def render(spec: PlotSpec) -> Path:
    """Render one figure to its output path; returns the written path."""
    cols = read_columns(spec.input_csv)
    fig = build_figure(spec, cols)
    out = Path(spec.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        with matplotlib.rc_context(_STYLE):
            metadata = {"Date": None} if spec.image_format == "svg" else \
                {"Software": "plotgen"}
            fig.savefig(out, format=spec.image_format, metadata=metadata)
    finally:
        plt.close(fig)
    return out
