"""Command-line access to sieving, statistics, random models, covariance
queries, and figure-dataset runs.

Exit codes: 0 on success, 2 on usage errors, 3 when a request exceeds
capacity. Primorial moduli are written P#i (P#4 = product of the first
four primes). SQPRIMES_OUT sets the default output directory.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .primes import CapacityError, interval_counts, table_for_k
from . import covariance as cov
from . import experiments as exp
from . import models
from . import stats


def _fmt(v) -> str:
    return f"{float(v):.12g}"


def _parse_modulus(token: str) -> cov.Modulus:
    if token.upper().startswith("P#"):
        return cov.Modulus.primorial(int(token[2:]))
    return cov.Modulus.explicit(int(token))


def _default_outdir(value: str | None) -> Path:
    if value is not None:
        return Path(value)
    return Path(os.environ.get("SQPRIMES_OUT", "."))


def _set_threads(n: int | None) -> None:
    if n is None:
        return
    if n < 1:
        raise ValueError("--threads must be >= 1")
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _cmd_sieve(args) -> int:
    table = table_for_k(args.k_max)
    counts = interval_counts(table, args.k_max)
    out = sys.stdout
    out.write("k,p_lo,p_hi,length,pi_k\n")
    for k in range(1, args.k_max + 1):
        p_lo, p_hi = table.p(k), table.p(k + 1)
        out.write(f"{k},{p_lo},{p_hi},{p_hi**2 - p_lo**2},{int(counts[k - 1])}\n")
    return 0


def _cmd_stats(args) -> int:
    table = table_for_k(args.k_max)
    counts = interval_counts(table, args.k_max)
    mu, sigma = stats.ms_series(table, args.k_max)
    tilde = stats.tilde_pi_series(table, args.k_max)
    li_k = stats.li_interval_series(table, args.k_max)
    pi_bar = stats.normalized_series(table, counts)
    err = stats.error_series(table, counts, args.c)
    tau = stats.tau_truncated(table, args.k_max) if args.tau else None
    cols = ["k", "pi_k", "li_k", "tilde_pi_k", "mu_k", "sigma_k", "pi_bar_k",
            "eps", "delta", "E", "eps_adj"]
    if tau is not None:
        cols.insert(4, "tau_k")
    out = sys.stdout
    out.write(",".join(cols) + "\n")
    for i in range(args.k_max):
        row = [str(i + 1), str(int(counts[i])), _fmt(li_k[i]), _fmt(tilde[i])]
        if tau is not None:
            row.append(_fmt(tau[i]))
        row += [_fmt(mu[i]),
                "" if np.isnan(sigma[i]) else _fmt(sigma[i]),
                "" if np.isnan(pi_bar[i]) else _fmt(pi_bar[i]),
                _fmt(err.epsilon[i]), _fmt(err.delta_norm[i]), _fmt(err.E[i]),
                _fmt(err.epsilon_adj[i])]
        out.write(",".join(row) + "\n")
    return 0


def _cmd_model(args) -> int:
    table = table_for_k(args.k_max)
    counts = models.model_ensemble(args.kind, table, args.k_max,
                                   args.realizations, args.seed)
    outdir = _default_outdir(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for r in range(args.realizations):
        series = models.RealizationSeries(args.kind, args.k_max, counts[r],
                                          args.seed, r)
        models.write_series_csv(series, outdir / f"{args.kind}_r{r:04d}.csv")
    es = models.ensemble_stats(counts, table, args.kind)
    print(f"wrote {args.realizations} realizations to {outdir}")
    print(f"var_total {_fmt(es.var_total)} var_diag {_fmt(es.var_diag)} "
          f"kappa1 {_fmt(es.kappa[1]) if args.k_max > 1 else 'n/a'}")
    return 0


def _cmd_cov(args) -> int:
    params = cov.CovParams(_parse_modulus(args.n1), _parse_modulus(args.n2),
                           args.h1, args.h2, args.q)
    value = cov.covariance(params, method=args.method)
    print(_fmt(value))
    return 0


def _cmd_figure(args) -> int:
    cfg = exp.ExperimentConfig(
        figure_id=args.id,
        k_max=args.k_max,
        realizations=args.realizations,
        seed=args.seed,
        c=args.c,
        d1=args.d1,
        d2=args.d2,
        output_dir=_default_outdir(args.out),
    )
    ds = exp.run_experiment(cfg)
    csv_path = Path(cfg.output_dir) / f"{cfg.figure_id}.csv"
    print(f"wrote {csv_path} ({len(ds.columns)} columns)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqprimes",
        description="prime statistics on the intervals between consecutive squared primes",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", help="exact interval table k, p_k, p_{k+1}, l_k, pi_k")
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_sieve)

    p = sub.add_parser("stats", help="per-interval estimators and error series")
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--tau", action="store_true", help="include truncated Moebius sums")
    p.add_argument("--c", type=float, default=stats.DEFAULT_C)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("model", help="sample a random model and write realizations")
    p.add_argument("--kind", choices=models.MODELS, required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--realizations", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_model)

    p = sub.add_parser("cov", help="one covariance query G(n1,n2,h1,h2,q)")
    p.add_argument("--n1", required=True, help="integer or P#i primorial")
    p.add_argument("--n2", required=True)
    p.add_argument("--h1", type=int, required=True)
    p.add_argument("--h2", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--method", choices=("auto", "enum", "threesum", "compact"),
                   default="auto")
    p.set_defaults(func=_cmd_cov)

    p = sub.add_parser("figure", help="build one figure dataset (CSV + manifest)")
    p.add_argument("--id", choices=exp.FIGURE_IDS, required=True)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--realizations", type=int, default=None)
    p.add_argument("--seed", type=int, default=20240601)
    p.add_argument("--c", type=float, default=stats.DEFAULT_C)
    p.add_argument("--d1", type=int, default=10)
    p.add_argument("--d2", type=int, default=50)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_figure)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _set_threads(getattr(args, "threads", None))
        return args.func(args)
    except CapacityError as err:
        print(f"capacity exceeded: {err}", file=sys.stderr)
        return 3
    except (ValueError, cov.UnsupportedModulusError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
