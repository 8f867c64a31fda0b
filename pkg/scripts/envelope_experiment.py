"""Sample (AUROC, AUNBC) pairs from synthetic predictors and compare with the envelope.

Writes points.csv (one row per vector) and envelope.csv (the bound curves)
into --out. Type-I vectors scatter inside the region, Type-II vectors trace
its upper edge.
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from nbscore import (
    EnvelopeQuery,
    ThresholdGrid,
    aunbc,
    aunbc_bounds,
    auroc_binned,
    confusion_at_thresholds,
    envelope_curve,
    make_rng,
    synth_boundary,
    synth_correlated,
)
from nbscore.data import write_csv

log = logging.getLogger("envelope")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--prevalence", type=float, default=0.3)
    ap.add_argument("--vectors", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="envelope_out")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    grid = ThresholdGrid([i / 10 for i in range(1, 10)])
    rng = make_rng(args.seed)
    y = np.zeros(args.n, dtype=np.int64)
    y[: int(round(args.n * args.prevalence))] = 1
    query = EnvelopeQuery(y.mean(), grid)

    rows, outside = [], 0
    for _ in range(args.vectors):
        s = synth_correlated(y, rng.uniform(-1, 1), rng)
        c = confusion_at_thresholds(s, y, grid)
        g, v = auroc_binned(c), aunbc(c, grid)
        lo, hi = aunbc_bounds(g, query)
        outside += not (lo - 1e-9 <= v <= hi + 1e-9)
        rows.append(["type1", g, v, lo, hi])
    for target in np.linspace(0.5, 1.0, 11):
        s = synth_boundary(y, float(target), grid)
        c = confusion_at_thresholds(s, y, grid)
        g, v = auroc_binned(c), aunbc(c, grid)
        rows.append(["type2", g, v, *aunbc_bounds(g, query)])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "points.csv", ["kind", "auroc", "aunbc", "lower", "upper"], rows)
    write_csv(out / "envelope.csv", ["auroc", "aunbc_upper", "aunbc_lower"], envelope_curve(query).tolist())
    log.info("%d type-I vectors, %d outside the envelope", args.vectors, outside)
    gap = max(abs(r[2] - r[4]) for r in rows if r[0] == "type2")
    log.info("type-II max distance to upper edge: %.3g (N=%d)", gap, args.n)


if __name__ == "__main__":
    main()
