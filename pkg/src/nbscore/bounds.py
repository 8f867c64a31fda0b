"""Envelopes linking binned AUROC and AUNBC, plus the finite-class margin."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, ThresholdGrid

DOMAIN_TOL = 1e-12


@dataclass(frozen=True)
class EnvelopeQuery:
    a0: float
    grid: ThresholdGrid

    def __post_init__(self):
        if not 0.0 < self.a0 < 1.0:
            raise ConfigError("prevalence a0 must lie in (0, 1)")
        if self.grid.m < 1:
            raise ConfigError("the envelope needs at least one inner threshold")


def _check_k(grid: ThresholdGrid, k: int) -> None:
    if not 1 <= k <= grid.m:
        raise IndexError(f"k={k} outside 1..{grid.m}")


def p_cumulative(grid: ThresholdGrid, k: int) -> float:
    """P_k = sum_{i=1..k} (p_{i+1} - p_i) p_i / (1 - p_i)."""
    _check_k(grid, k)
    return float(np.sum(grid.spacing[1 : k + 1] * grid.odds[1 : k + 1]))


def a_k(x: float, a0: float, grid: ThresholdGrid, k: int) -> float:
    """Largest AUNBC reachable at AUROC x when the negatives stop at p_k."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("AUROC must lie in [0, 1]")
    pk = p_cumulative(grid, k)
    p = grid.full[k]
    b0 = 1.0 - a0
    if x <= 1.0 - b0 * pk / ((1.0 - p) * a0):
        return -a0 * (1.0 - p) * (1.0 - x) + a0 - b0 * pk
    return a0 - 2.0 * math.sqrt(pk * (1.0 - p) * a0 * b0 * (1.0 - x))


def aunbc_lower(query: EnvelopeQuery) -> float:
    grid = query.grid
    return query.a0 * grid.inner[0] - (1.0 - query.a0) * p_cumulative(grid, grid.m)


def aunbc_upper(auroc: float, query: EnvelopeQuery) -> float:
    return max(a_k(auroc, query.a0, query.grid, k) for k in range(1, query.grid.m + 1))


def aunbc_bounds(auroc: float, query: EnvelopeQuery) -> tuple[float, float]:
    """(lower, upper) on AUNBC for a model with the given binned AUROC."""
    return aunbc_lower(query), aunbc_upper(auroc, query)


def b_k(y: float, a0: float, grid: ThresholdGrid, k: int) -> float:
    """Inverse of a_k: smallest AUROC compatible with AUNBC y through index k.

    The formula is evaluated for any y <= a0, so values below the AUNBC
    lower bound give results below 0; ``auroc_lower`` enforces the full
    domain and clamps.
    """
    pk = p_cumulative(grid, k)
    if not y <= a0 + DOMAIN_TOL:
        raise ValueError(f"AUNBC {y} exceeds the prevalence {a0}")
    p = grid.full[k]
    b0 = 1.0 - a0
    if y <= a0 - 2.0 * b0 * pk:
        return 1.0 - (a0 - y - b0 * pk) / (a0 * (1.0 - p))
    return 1.0 - (a0 - y) ** 2 / (4.0 * pk * (1.0 - p) * a0 * b0)


def auroc_lower(aunbc: float, query: EnvelopeQuery) -> float:
    """max(min_k B_k(aunbc), 0) for aunbc in [lower bound, a0]."""
    lower = aunbc_lower(query)
    if not lower - DOMAIN_TOL <= aunbc <= query.a0 + DOMAIN_TOL:
        raise ValueError(f"AUNBC {aunbc} outside [{lower}, {query.a0}]")
    m = query.grid.m
    return max(min(b_k(aunbc, query.a0, query.grid, k) for k in range(1, m + 1)), 0.0)


def envelope_curve(query: EnvelopeQuery, points: int = 1001) -> np.ndarray:
    """Rows (auroc, aunbc_upper, aunbc_lower) on a uniform AUROC grid over [0, 1]."""
    xs = np.linspace(0.0, 1.0, points)
    lower = aunbc_lower(query)
    return np.array([(x, aunbc_upper(x, query), lower) for x in xs])


def generalization_margin(
    size_l: int, size_t: int, delta: float, n: int, grid: ThresholdGrid
) -> float:
    """Gap between expected and empirical weighted loss for finite coefficient
    and intercept sets, holding with probability at least 1 - 2(M+1) delta."""
    if size_l < 1 or size_t < 1 or n < 1:
        raise ValueError("set sizes and n must be positive")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    root = math.sqrt((math.log(size_l) + math.log(size_t) - math.log(delta)) / (2 * n))
    return float(np.sum(grid.weights / (1.0 - grid.full[:-1]))) * root
