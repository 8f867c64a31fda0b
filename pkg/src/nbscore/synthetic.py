"""Synthetic prediction vectors for probing the AUROC/AUNBC envelope.

Type I: scores with a prescribed Pearson correlation to the labels.
Type II: piecewise scores that sit on the upper AUNBC envelope for a target
binned AUROC.

Randomness comes from numpy's PCG64 bit generator (``np.random.default_rng``)
and its ziggurat standard-normal sampler, so a seed fixes the output on every
platform numpy supports.
"""

from __future__ import annotations

import math

import numpy as np

from .bounds import p_cumulative
from .core import DataError, ThresholdGrid, as_labels


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def synth_correlated(labels, r: float, rng: np.random.Generator) -> np.ndarray:
    """Scores in [0, 1] whose Pearson correlation with ``labels`` equals r."""
    y_raw = as_labels(labels).astype(np.float64)
    n = y_raw.shape[0]
    if n < 3:
        raise DataError("N ≥ 3 required")
    if not -1.0 <= r <= 1.0:
        raise ValueError("r must lie in [-1, 1]")
    sd = y_raw.std()
    if sd == 0:
        raise DataError("degenerate labels: both classes required")
    y = (y_raw - y_raw.mean()) / sd
    z = rng.standard_normal(n)
    z = z - (z @ y) / (y @ y) * y
    z = z / z.std()
    s = r * y + math.sqrt(1.0 - r * r) * z
    s = s - s.min()
    return s / s.max()


def _round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def _candidate_b1(g: float, a0: float, pk: float, p: float) -> tuple[float, float]:
    """(b1, a0 - a_k) for one candidate index; the second value is written
    in a form that stays finite at g = 1."""
    b0 = 1.0 - a0
    if g <= 1.0 - b0 * pk / ((1.0 - p) * a0):
        return b0, (1.0 - g) * a0
    b1 = math.sqrt((1.0 - p) * a0 * b0 * (1.0 - g) / pk)
    return b1, math.sqrt((1.0 - g) * a0 * b0 * pk / (1.0 - p))


def boundary_plan(labels, g: float, grid: ThresholdGrid) -> dict:
    """Candidate scores F_k and the chosen index K with its (a_K, b_1)."""
    y = as_labels(labels)
    n = y.shape[0]
    a0 = y.sum() / n
    if not 0.0 < a0 < 1.0:
        raise DataError("degenerate labels: both classes required")
    if not 0.0 <= g <= 1.0:
        raise ValueError("target AUROC must lie in [0, 1]")
    m = grid.m
    p = grid.full
    b0 = 1.0 - a0
    scores = []
    for k in range(1, m + 1):
        pk = p_cumulative(grid, k)
        b1, drop = _candidate_b1(g, a0, pk, p[k])
        a = np.full(m + 1, a0)
        a[k:] = a0 - drop
        b = np.zeros(m + 1)
        b[0] = b0
        b[1 : k + 1] = b1
        scores.append(float(np.sum(grid.spacing * (a - b * grid.odds))))
    k_best = int(np.argmax(scores)) + 1  # argmax returns the first maximum
    pk = p_cumulative(grid, k_best)
    b1, drop = _candidate_b1(g, a0, pk, p[k_best])
    return {"scores": scores, "k": k_best, "a_k": a0 - drop, "b_1": b1, "a0": a0}


def synth_boundary(
    labels, g: float, grid: ThresholdGrid, all_negatives_at_pk: bool = False
) -> np.ndarray:
    """Piecewise scores attaining the largest AUNBC for binned AUROC ~ g.

    The first round(N a_K) positives score 1, other positives p_{K-1}. The
    first round(N b_1) negatives score p_K and the remaining negatives 0;
    on the linear branch b_1 = b_0, so all negatives score p_K.

    ``all_negatives_at_pk`` puts every negative at p_K regardless of b_1.
    On the square-root branch that vector leaves the envelope (at g = 1 it
    falls short by (1 - a0) P_K), so it is kept only for comparison.
    """
    y = as_labels(labels)
    n = y.shape[0]
    plan = boundary_plan(y, g, grid)
    k = plan["k"]
    p = grid.full
    s = np.empty(n)
    neg = np.flatnonzero(y == 0)
    if all_negatives_at_pk:
        n_high_neg = neg.shape[0]
    else:
        n_high_neg = min(_round_half_away(n * plan["b_1"]), neg.shape[0])
    s[neg] = 0.0
    s[neg[:n_high_neg]] = p[k]
    pos = np.flatnonzero(y == 1)
    n_top = min(_round_half_away(n * plan["a_k"]), pos.shape[0])
    s[pos] = p[k - 1]
    s[pos[:n_top]] = 1.0
    return s
