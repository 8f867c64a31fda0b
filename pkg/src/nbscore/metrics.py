"""Threshold-binned confusion counts and the scalar performance measures.

Counts stay integer until the last division so that values are reproducible
bit-for-bit across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfusionCurve, DataError, ThresholdGrid, as_labels, as_predictions


def _counts_at_or_above(sorted_vals: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    return sorted_vals.shape[0] - np.searchsorted(sorted_vals, cuts, side="left")


def confusion_at_thresholds(preds, labels, grid: ThresholdGrid) -> ConfusionCurve:
    """TP_i, FP_i = number of positives/negatives with prediction >= p_i, i = 0..M+1."""
    y = as_labels(labels)
    s = as_predictions(preds, y.shape[0])
    pos = np.sort(s[y == 1])
    neg = np.sort(s[y == 0])
    tp = _counts_at_or_above(pos, grid.full)
    fp = _counts_at_or_above(neg, grid.full)
    # p_{M+1} = 1 is a sentinel: nothing is counted above it
    tp[-1] = 0
    fp[-1] = 0
    return ConfusionCurve(tp, fp, pos.shape[0], neg.shape[0])


def confusion_from_scores(scores, labels, intercepts) -> ConfusionCurve:
    """Counts for the rule "predict positive at threshold i iff score >= T_i".

    ``intercepts`` holds T_0..T_M; the sentinel TP_{M+1} = FP_{M+1} = 0 is
    appended. T_0 is applied literally, so TP_0 < n_pos is possible when T_0
    exceeds the smallest score.
    """
    y = as_labels(labels)
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    if s.shape[0] != y.shape[0]:
        raise DataError(f"length mismatch: {s.shape[0]} scores for {y.shape[0]} labels")
    t = np.asarray(intercepts, dtype=np.float64).reshape(-1)
    if np.any(np.diff(t) < 0):
        raise DataError("intercepts must be nondecreasing")
    pos = np.sort(s[y == 1])
    neg = np.sort(s[y == 0])
    tp = np.append(_counts_at_or_above(pos, t), 0)
    fp = np.append(_counts_at_or_above(neg, t), 0)
    return ConfusionCurve(tp, fp, pos.shape[0], neg.shape[0])


def _check_pair(curve: ConfusionCurve, grid: ThresholdGrid) -> None:
    if curve.m != grid.m:
        raise DataError(f"curve has M={curve.m} thresholds, grid has M={grid.m}")
    if curve.n == 0:
        raise DataError("N ≥ 1 required")


def net_benefit(curve: ConfusionCurve, grid: ThresholdGrid, i: int) -> float:
    """TP_i/N - (FP_i/N) * p_i/(1 - p_i)."""
    _check_pair(curve, grid)
    if not 0 <= i <= grid.m:
        raise IndexError(f"threshold index {i} outside 0..{grid.m}")
    n = curve.n
    return float(curve.tp[i] / n - curve.fp[i] / n * grid.odds[i])


def net_benefit_curve(curve: ConfusionCurve, grid: ThresholdGrid) -> np.ndarray:
    """Net benefit at every p_i, i = 0..M."""
    _check_pair(curve, grid)
    n = curve.n
    return curve.tp[:-1] / n - curve.fp[:-1] / n * grid.odds


def _weighted_sum(curve: ConfusionCurve, grid: ThresholdGrid, w: np.ndarray) -> float:
    _check_pair(curve, grid)
    terms = curve.tp[:-1] - curve.fp[:-1] * grid.odds
    return float(np.sum(w * terms) / curve.n)


def aunbc(curve: ConfusionCurve, grid: ThresholdGrid) -> float:
    """Area under the net-benefit curve; always uses the spacing weights."""
    return _weighted_sum(curve, grid, grid.spacing)


def weighted_objective(
    curve: ConfusionCurve, grid: ThresholdGrid, num_nonzero: int, c0: float
) -> float:
    """Training loss: negative grid-weighted net benefit plus c0 * ||lambda||_0."""
    if num_nonzero < 0:
        raise ValueError("num_nonzero must be nonnegative")
    return -_weighted_sum(curve, grid, grid.weights) + c0 * num_nonzero


def auroc_binned(curve: ConfusionCurve) -> float:
    """Grid-binned AUROC: sum_i (FP_i - FP_{i+1}) TP_i / (N+ N-).

    Exact for piecewise-constant risk models. For continuous predictions
    this is not the rank-based AUROC; all mass below p_1 yields 1.
    """
    if curve.n_pos == 0 or curve.n_neg == 0:
        raise DataError("degenerate labels: AUROC needs both classes")
    fp = curve.fp
    tp = curve.tp
    num = int(np.sum((fp[:-1] - fp[1:]) * tp[:-1]))
    return num / (curve.n_pos * curve.n_neg)


@dataclass(frozen=True, eq=False)
class BinStats:
    """Per-bin sample count, positive count and mean prediction.

    Bin i covers [p_i, p_{i+1}); the top bin is closed at 1.
    """

    n: np.ndarray
    o: np.ndarray
    mean_score: np.ndarray

    @property
    def total(self) -> int:
        return int(self.n.sum())

    @property
    def rates(self) -> np.ndarray:
        """o_i / n_i, NaN for empty bins."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.n > 0, self.o / np.maximum(self.n, 1), np.nan)


def bin_index(preds, grid: ThresholdGrid) -> np.ndarray:
    """Index i with p_i <= pred < p_{i+1}; a prediction of exactly 1 maps to M."""
    return np.searchsorted(grid.inner, preds, side="right")


def stats_from_bins(bins, labels, n_bins: int, preds=None) -> BinStats:
    """Aggregate counts for precomputed bin indices.

    The per-bin mean is computed as min + mean(x - min) so that a bin holding
    one repeated value reports that value exactly.
    """
    bins = np.asarray(bins, dtype=np.int64)
    y = np.asarray(labels, dtype=np.int64)
    n = np.bincount(bins, minlength=n_bins)[:n_bins]
    o = np.bincount(bins, weights=y, minlength=n_bins)[:n_bins].astype(np.int64)
    mean = np.zeros(n_bins)
    if preds is not None:
        s = np.asarray(preds, dtype=np.float64)
        lo = np.full(n_bins, np.inf)
        np.minimum.at(lo, bins, s)
        excess = np.bincount(bins, weights=s - lo[bins], minlength=n_bins)[:n_bins]
        filled = n > 0
        mean[filled] = lo[filled] + excess[filled] / n[filled]
    return BinStats(n.astype(np.int64), o, mean)


def bin_stats(preds, labels, grid: ThresholdGrid) -> BinStats:
    y = as_labels(labels)
    s = as_predictions(preds, y.shape[0])
    return stats_from_bins(bin_index(s, grid), y, grid.m + 1, s)


def ece(stats: BinStats, n: int) -> float:
    """Expected calibration error: sum_i (n_i/n) |o_i/n_i - mean_i|; empty bins add 0."""
    if stats.total != n:
        raise DataError(f"bin counts sum to {stats.total}, expected {n}")
    total = 0.0
    for n_i, o_i, e_i in zip(stats.n, stats.o, stats.mean_score):
        if n_i > 0:
            total += n_i / n * abs(o_i / n_i - e_i)
    return total


@dataclass(frozen=True)
class HLResult:
    value: float | None
    skipped_bins: int

    @property
    def defined(self) -> bool:
        return self.value is not None

    def to_dict(self) -> dict:
        return {"value": self.value, "skipped_bins": self.skipped_bins}


def hl_statistic(stats: BinStats, risk_levels, n: int | None = None) -> HLResult:
    """Hosmer-Lemeshow sum over bins with expected counts E_i = q_i n_i.

    Bins where the variance term vanishes (n_i = 0, E_i = 0 or E_i = n_i)
    are skipped and counted. If every bin is skipped the value is None.
    """
    q = np.asarray(risk_levels, dtype=np.float64)
    if q.shape != stats.n.shape:
        raise DataError("one risk level per bin required")
    if np.any(q < 0) or np.any(q > 1):
        raise DataError("risk levels must lie in [0, 1]")
    if n is not None and stats.total != n:
        raise DataError(f"bin counts sum to {stats.total}, expected {n}")
    value = 0.0
    skipped = 0
    used = 0
    for n_i, o_i, q_i in zip(stats.n, stats.o, q):
        e_i = q_i * n_i
        if n_i <= 0 or not 0.0 < e_i < n_i:
            skipped += 1
            continue
        value += (o_i - e_i) ** 2 / (e_i * (1.0 - e_i / n_i))
        used += 1
    return HLResult(value if used else None, skipped)


def metric_report(
    preds,
    labels,
    grid: ThresholdGrid,
    risk_levels=None,
    num_nonzero: int = 0,
    c0: float = 0.0,
) -> dict:
    """All metrics for one prediction vector as a JSON-ready dict.

    Without explicit ``risk_levels`` the HL expected counts use each bin's
    mean prediction.
    """
    y = as_labels(labels)
    s = as_predictions(preds, y.shape[0])
    curve = confusion_at_thresholds(s, y, grid)
    stats = bin_stats(s, y, grid)
    q = stats.mean_score if risk_levels is None else risk_levels
    auroc = auroc_binned(curve) if curve.n_pos and curve.n_neg else None
    return {
        "auroc": auroc,
        "aunbc": aunbc(curve, grid),
        "ece": ece(stats, y.shape[0]),
        "hl": hl_statistic(stats, q).to_dict(),
        "net_benefit": [float(v) for v in net_benefit_curve(curve, grid)],
        "objective": weighted_objective(curve, grid, num_nonzero, c0),
    }
