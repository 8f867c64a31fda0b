"""Cross-validate a scoring system on a CSV (or a simulated cohort) and print the summary.

Example:
    python scripts/cv_experiment.py --simulate 800 --folds 10 --repeats 2 --out cv_out
"""

import argparse
import json
from pathlib import Path

import numpy as np

from nbscore import SolverConfig, ThresholdGrid, validate_dataset
from nbscore.cv import CvPlan, run_cv
from nbscore.data import ingest_csv
from nbscore.report import emit_curves


def simulated_cohort(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 2, size=(n, 6))
    w = np.array([1.4, -0.9, 0.7, 0.0, 0.5, -0.6])
    y = (rng.random(n) < 1 / (1 + np.exp(-(x @ w - 0.5)))).astype(np.int64)
    return validate_dataset(x, y, tuple(f"x{k}" for k in range(6)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="CSV with 0/1 label column")
    src.add_argument("--simulate", type=int, metavar="N", help="simulate N binary-feature samples")
    ap.add_argument("--label-col", default="label")
    ap.add_argument("--folds", type=int, default=10)
    ap.add_argument("--repeats", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--c0", type=float, default=1e-3)
    ap.add_argument("--bound", type=int, default=5)
    ap.add_argument("--cooling", type=float, default=1e-5, help="SA temperature step")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="cv_out")
    args = ap.parse_args(argv)

    if args.data:
        dataset = ingest_csv(args.data, args.label_col).dataset
    else:
        dataset = simulated_cohort(args.simulate, args.seed)
    grid = ThresholdGrid([i / 10 for i in range(1, 10)])
    config = SolverConfig(c0=args.c0, default_bound=args.bound, sa_cooling_rate=args.cooling)
    plan = CvPlan(args.folds, args.repeats, args.seed)
    report = run_cv(dataset, grid, config, plan, workers=args.workers)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    emit_curves(report.oof[0], dataset.labels, grid, out)

    print(f"{'':6} {'AUROC':>15} {'AUNBC':>15} {'ECE':>15} {'size':>6}")
    for split in ("train", "test"):
        agg = report.aggregate[split]
        cells = [f"{agg[k]['mean']:.3f} ± {agg[k]['std']:.3f}" for k in ("auroc", "aunbc", "ece")]
        print(f"{split:6} {cells[0]:>15} {cells[1]:>15} {cells[2]:>15} {agg['size']['mean']:6.1f}")


if __name__ == "__main__":
    main()
