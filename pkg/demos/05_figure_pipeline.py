"""End-to-end dataset pipeline: one CSV + manifest per figure.

Same (config, seed) regenerate the CSVs bit for bit. Pointing the
optional plotgen renderer at the output directory turns them into images.
"""
import pathlib
import sys

from sqprimes.experiments import FIGURE_IDS, ExperimentConfig, run_experiment

out = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path("demo_figures")

for fid in FIGURE_IDS:
    cfg = ExperimentConfig(
        figure_id=fid,
        k_max=300,
        realizations=20 if fid in ("random_models", "covariance_sums", "stddev") else 1,
        seed=20240601,
        d2=30,
        output_dir=out,
    )
    ds = run_experiment(cfg)
    print(f"{fid:>16}: {len(ds.columns):3d} columns -> {out / (fid + '.csv')}")

print("\nrender with:  python -m plotgen.cli render --figure ratios "
      f"--in {out}/ratios.csv --out {out}/ratios.svg")
