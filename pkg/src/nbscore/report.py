"""Scorecard tables and plot-ready curve data."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .core import DataError, ScoreModel, ThresholdGrid, as_labels, as_predictions
from .data import BinarizationSpec, ColumnRule, write_csv
from .metrics import bin_stats, confusion_at_thresholds, net_benefit_curve


@dataclass(frozen=True)
class PointsRow:
    predictor: str
    category: str
    points: int


@dataclass(frozen=True)
class Band:
    low: int
    high: int
    risk: float
    index: int


@dataclass(frozen=True)
class Scorecard:
    points: tuple[PointsRow, ...]
    bands: tuple[Band, ...]
    score_min: int
    score_max: int

    def risk_for(self, score: int) -> float:
        for b in self.bands:
            if b.low <= score <= b.high:
                return b.risk
        raise KeyError(f"score {score} outside {self.score_min}..{self.score_max}")


def _spec_for(model: ScoreModel, spec: BinarizationSpec | None) -> BinarizationSpec:
    names = list(model.feature_names)
    if spec is not None and spec.output_names() == names:
        return spec
    return BinarizationSpec({n: ColumnRule("pass") for n in names})


def scorecard(model: ScoreModel, spec: BinarizationSpec | None = None) -> Scorecard:
    """Points per predictor category and the score band each risk level covers.

    Bands follow the intercepts: band 0 holds every score below T_1, band i
    holds [T_i, T_{i+1}) and the last band everything from T_M up, clipped
    to the attainable score range. Empty bands are omitted.
    """
    spec = _spec_for(model, spec)
    lam = model.coefficients
    rows = []
    lo_total = hi_total = 0
    for name, cols in spec.predictor_columns().items():
        pts = []
        for label, enc in spec.rules[name].levels():
            v = int(round(float(enc @ lam[cols])))
            pts.append(v)
            rows.append(PointsRow(name, label, v))
        lo_total += min(pts)
        hi_total += max(pts)
    t = model.intercepts
    m = t.shape[0] - 1
    bands = []
    for i in range(m + 1):
        low = lo_total if i == 0 else max(int(t[i]), lo_total)
        high = hi_total if i == m else min(int(t[i + 1]) - 1, hi_total)
        if low <= high:
            bands.append(Band(low, high, float(model.risk_levels[i]), i))
    return Scorecard(tuple(rows), tuple(bands), lo_total, hi_total)


def _pct(q: float) -> str:
    return f"{100.0 * q:.1f}%"


def _span(lo: int, hi: int) -> str:
    if lo == hi:
        return str(lo)
    return f"{lo}-{hi}" if lo >= 0 else f"{lo} to {hi}"


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(r[c]) for r in [header, *rows]) for c in range(len(header))]
    fmt = lambda r: "  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
    rule = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(header), rule, *(fmt(r) for r in rows)])


def emit_scorecard(model: ScoreModel, spec: BinarizationSpec | None = None) -> str:
    card = scorecard(model, spec)
    pts = []
    last = None
    for r in card.points:
        pts.append([r.predictor if r.predictor != last else "", r.category, str(r.points)])
        last = r.predictor
    part1 = _table(["Predictor", "Category", "Points"], pts)
    part1 += f"\nTotal possible score: {_span(card.score_min, card.score_max)}"
    band_rows = [[_span(b.low, b.high), _pct(b.risk)] for b in card.bands]
    part2 = _table(["Total score", "Predicted risk"], band_rows)
    return f"Points\n\n{part1}\n\nRisk bands\n\n{part2}\n"


def roc_points(preds, labels, grid: ThresholdGrid) -> list[list[float]]:
    """(threshold, FPR, TPR) at p_0 = 0, every inner threshold and p_{M+1} = 1."""
    curve = confusion_at_thresholds(preds, labels, grid)
    if curve.n_pos == 0 or curve.n_neg == 0:
        raise DataError("degenerate labels: ROC needs both classes")
    return [
        [float(p), curve.fp[i] / curve.n_neg, curve.tp[i] / curve.n_pos]
        for i, p in enumerate(grid.full)
    ]


def calibration_points(preds, labels, grid: ThresholdGrid) -> list[list[float]]:
    """(bin, midpoint, mean predicted, observed rate, count) for occupied bins."""
    stats = bin_stats(preds, labels, grid)
    p = grid.full
    out = []
    for i in range(grid.m + 1):
        if stats.n[i] > 0:
            out.append(
                [i, 0.5 * (p[i] + p[i + 1]), float(stats.mean_score[i]),
                 stats.o[i] / stats.n[i], int(stats.n[i])]
            )
    return out


def decision_curve(preds, labels, grid: ThresholdGrid) -> list[list[float]]:
    """(threshold, model NB, treat-all NB, treat-none NB) at p_0..p_M."""
    y = as_labels(labels)
    s = as_predictions(preds, y.shape[0])
    curve = confusion_at_thresholds(s, y, grid)
    nb = net_benefit_curve(curve, grid)
    a0 = curve.n_pos / curve.n
    treat_all = a0 - (1.0 - a0) * grid.odds
    return [
        [float(grid.full[i]), float(nb[i]), float(treat_all[i]), 0.0] for i in range(grid.m + 1)
    ]


CURVE_FILES = {
    "roc": ("roc.csv", ["threshold", "fpr", "tpr"], roc_points),
    "calibration": (
        "calibration.csv",
        ["bin", "midpoint", "mean_predicted", "observed_rate", "count"],
        calibration_points,
    ),
    "decision": (
        "decision_curve.csv",
        ["threshold", "model_nb", "treat_all_nb", "treat_none_nb"],
        decision_curve,
    ),
}


def emit_curves(preds, labels, grid: ThresholdGrid, out_dir) -> dict[str, Path]:
    """Write the ROC, calibration and decision-curve CSVs into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables = {key: fn(preds, labels, grid) for key, (_, _, fn) in CURVE_FILES.items()}
    paths = {}
    for key, (fname, header, _) in CURVE_FILES.items():
        paths[key] = out / fname
        write_csv(paths[key], header, tables[key])
    return paths
