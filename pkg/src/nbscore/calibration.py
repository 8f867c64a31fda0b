"""Prediction repair that can only raise AUNBC, and calibrated risk levels.

A bin [p_i, p_{i+1}) whose event rate falls below p_i is pushed down to
p_{i-1}; one whose event rate exceeds p_{i+1} is pushed up to p_{i+1}. Either
move strictly raises AUNBC. For a model whose bins already satisfy
p_i <= O_i/N_i <= p_{i+1}, setting q_i = O_i/N_i gives zero ECE.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ThresholdGrid, as_labels, as_predictions
from .metrics import BinStats, aunbc, confusion_at_thresholds

CLAMP_EPS = 1e-9


@dataclass(frozen=True)
class RepairReport:
    moved_bins: tuple[tuple[int, str], ...]
    aunbc_before: float
    aunbc_after: float
    order_preserved: bool
    sweeps: int = 1

    def to_dict(self) -> dict:
        return {
            "moved_bins": [[i, d] for i, d in self.moved_bins],
            "aunbc_before": self.aunbc_before,
            "aunbc_after": self.aunbc_after,
            "order_preserved": self.order_preserved,
            "sweeps": self.sweeps,
        }


def _sweep(c: np.ndarray, y: np.ndarray, grid: ThresholdGrid) -> list[tuple[int, str]]:
    """One left-to-right pass, modifying ``c`` in place."""
    p = grid.full
    moved = []
    for i in range(grid.m + 1):
        # bin membership is read from the current, already modified predictions
        in_bin = (c >= p[i]) & (c < p[i + 1])
        n_i = int(in_bin.sum())
        o_i = int(y[in_bin].sum())
        if o_i < n_i * p[i]:
            c[in_bin] = p[i - 1]
            moved.append((i, "down"))
        elif o_i > n_i * p[i + 1]:
            c[in_bin] = p[i + 1]
            moved.append((i, "up"))
    return moved


def improve_aunbc(
    preds, labels, grid: ThresholdGrid, preserve_order: bool = False
) -> tuple[np.ndarray, RepairReport]:
    """Single sweep over bins 0..M; returns repaired predictions and an audit report.

    With ``preserve_order`` the repaired values get 1% of the original score
    added (capped at 1) so that strictly ordered inputs stay strictly ordered.
    """
    y = as_labels(labels)
    original = as_predictions(preds, y.shape[0])
    before = aunbc(confusion_at_thresholds(original, y, grid), grid)
    c = original.copy()
    moved = _sweep(c, y, grid)
    if preserve_order:
        c = np.minimum(c + original / 100.0, 1.0)
    after = aunbc(confusion_at_thresholds(c, y, grid), grid)
    return c, RepairReport(tuple(moved), before, after, preserve_order)


def improve_aunbc_until_stable(
    preds, labels, grid: ThresholdGrid, preserve_order: bool = False, max_sweeps: int = 1000
) -> tuple[np.ndarray, RepairReport]:
    """Repeat the sweep until no bin moves, then apply the optional order step once."""
    y = as_labels(labels)
    original = as_predictions(preds, y.shape[0])
    before = aunbc(confusion_at_thresholds(original, y, grid), grid)
    c = original.copy()
    moved: list[tuple[int, str]] = []
    sweeps = 0
    while sweeps < max_sweeps:
        step = _sweep(c, y, grid)
        sweeps += 1
        if not step:
            break
        moved.extend(step)
    if preserve_order:
        c = np.minimum(c + original / 100.0, 1.0)
    after = aunbc(confusion_at_thresholds(c, y, grid), grid)
    return c, RepairReport(tuple(moved), before, after, preserve_order, sweeps)


@dataclass(frozen=True)
class RiskAssignment:
    """Risk level per bin plus the bins that needed special handling.

    ``merged`` lists bins whose event rate hit the upper edge p_{i+1}; their
    samples belong in bin i+1, which leaves bin i empty.
    """

    levels: np.ndarray
    clamped: tuple[int, ...] = ()
    merged: tuple[int, ...] = ()
    stats: BinStats | None = field(default=None, compare=False)


def assign_risk_levels(stats: BinStats, grid: ThresholdGrid) -> RiskAssignment:
    """q_i = O_i / N_i for occupied bins, bin midpoint for empty ones.

    The top bin is closed at 1, so q_M = 1 is allowed there.
    """
    p = grid.full
    m = grid.m
    n = stats.n.astype(np.int64).copy()
    o = stats.o.astype(np.int64).copy()
    merged = []
    for i in range(m):
        if n[i] > 0 and o[i] / n[i] == p[i + 1]:
            n[i + 1] += n[i]
            o[i + 1] += o[i]
            n[i] = 0
            o[i] = 0
            merged.append(i)
    q = np.empty(m + 1)
    clamped = []
    for i in range(m + 1):
        hi = p[i + 1] if i == m else p[i + 1] - CLAMP_EPS
        if n[i] == 0:
            q[i] = 0.5 * (p[i] + p[i + 1])
            continue
        rate = o[i] / n[i]
        if p[i] <= rate <= hi:
            q[i] = rate
        else:
            q[i] = min(max(rate, p[i]), hi)
            clamped.append(i)
    mean = np.where(n > 0, q, 0.0)
    return RiskAssignment(q, tuple(clamped), tuple(merged), BinStats(n, o, mean))
