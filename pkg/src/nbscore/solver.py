"""Training integer scoring systems that maximize weighted net benefit.

The intercept search (``find_optimal_t``) is exact for a fixed coefficient
vector; coefficients are searched by simulated annealing (``sa_train``) or,
for small boxes, by full enumeration (``exact_enumerate``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .calibration import assign_risk_levels
from .core import (
    BinaryDataset,
    ConfigError,
    DataError,
    ScoreModel,
    SolverConfig,
    ThresholdGrid,
)
from .metrics import ConfusionCurve, confusion_from_scores, stats_from_bins, weighted_objective


class InterceptFit(NamedTuple):
    intercepts: np.ndarray
    loss: float


@dataclass(frozen=True, eq=False)
class TrainResult:
    model: ScoreModel
    loss: float
    trace: tuple[float, ...] = ()
    evaluations: int = 0
    clamped_bins: tuple[int, ...] = ()
    merged_bins: tuple[int, ...] = ()
    chain_losses: tuple[float, ...] = field(default=())


def score_bins(scores, intercepts) -> np.ndarray:
    """Risk band of each score: 0 below T_1, i for T_i <= s < T_{i+1}, M from T_M up."""
    t = np.asarray(intercepts)
    return np.searchsorted(t[1:], scores, side="right")


def predict(model: ScoreModel, x) -> tuple[float, float]:
    """(total score, risk) for one feature row."""
    row = np.asarray(x, dtype=np.float64).reshape(-1)
    if row.shape[0] != model.coefficients.shape[0]:
        raise DataError(
            f"length mismatch: row has {row.shape[0]} values, model has "
            f"{model.coefficients.shape[0]} coefficients"
        )
    score = float(row @ model.coefficients)
    band = int(score_bins(np.array([score]), model.intercepts)[0])
    return score, float(model.risk_levels[band])


def predict_many(model: ScoreModel, features) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.coefficients.shape[0]:
        raise DataError("feature matrix does not match the model's coefficients")
    scores = x @ model.coefficients
    return scores, model.risk_levels[score_bins(scores, model.intercepts)]


def find_optimal_t(scores, labels, grid: ThresholdGrid, c0: float, num_nonzero: int) -> InterceptFit:
    """Stage-wise intercepts maximizing net benefit at each p_i.

    Candidates are the distinct floor(score) values plus one integer above
    the largest (the "treat nobody" choice). T_0 is the smallest candidate;
    T_i maximizes the net benefit at p_i over candidates >= T_{i-1}, ties
    going to the smallest T. The loss weights each stage by the grid weight.
    """
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    n = s.shape[0]
    if n == 0:
        raise DataError("empty scores")
    if y.shape[0] != n:
        raise DataError(f"length mismatch: {n} scores for {y.shape[0]} labels")
    if not np.all(np.isfinite(s)):
        raise DataError("scores must be finite")
    floors = np.floor(s)
    cands = np.unique(floors)
    cands = np.append(cands, cands[-1] + 1.0)
    pos = np.sort(s[y == 1])
    neg = np.sort(s[y == 0])
    tp = pos.shape[0] - np.searchsorted(pos, cands, side="left")
    fp = neg.shape[0] - np.searchsorted(neg, cands, side="left")
    m = grid.m
    chosen = np.zeros(m + 1, dtype=np.int64)
    start = 0
    for i in range(1, m + 1):
        nb = tp[start:] / n - fp[start:] / n * grid.odds[i]
        start += int(np.argmax(nb))
        chosen[i] = start
    curve = ConfusionCurve(
        np.append(tp[chosen], 0), np.append(fp[chosen], 0), pos.shape[0], neg.shape[0]
    )
    loss = weighted_objective(curve, grid, num_nonzero, c0)
    return InterceptFit(cands[chosen].astype(np.int64), loss)


def build_model(
    dataset: BinaryDataset,
    grid: ThresholdGrid,
    coefficients,
    intercepts,
    provenance: dict | None = None,
) -> tuple[ScoreModel, tuple[int, ...], tuple[int, ...]]:
    """Attach calibrated risk levels q_i = O_i/N_i to fitted coefficients and intercepts.

    A band whose event rate equals the next threshold exactly is folded
    into the band above by lowering that band's intercept; net benefit at
    every threshold is unchanged by the fold.
    """
    lam = np.asarray(coefficients, dtype=np.int64)
    t = np.asarray(intercepts, dtype=np.int64).copy()
    scores = dataset.features @ lam
    bins = score_bins(scores, t)
    stats = stats_from_bins(bins, dataset.labels, grid.m + 1)
    assignment = assign_risk_levels(stats, grid)
    for i in assignment.merged:
        t[i + 1] = t[i]
    model = ScoreModel(
        coefficients=lam,
        intercepts=t,
        risk_levels=assignment.levels,
        grid=grid,
        feature_names=dataset.feature_names,
        provenance=provenance or {},
    )
    return model, assignment.clamped, assignment.merged


def model_objective(model: ScoreModel, dataset: BinaryDataset, c0: float) -> float:
    """Weighted objective of a model recomputed from scratch on a dataset."""
    scores = dataset.features @ model.coefficients
    curve = confusion_from_scores(scores, dataset.labels, model.intercepts)
    return weighted_objective(curve, model.grid, model.num_nonzero, c0)


def _initial_point(bounds: np.ndarray, initial) -> np.ndarray:
    if initial is None:
        # zero vector, pulled into the box when the box excludes zero
        return np.clip(np.zeros(bounds.shape[0], dtype=np.int64), bounds[:, 0], bounds[:, 1])
    lam = np.asarray(initial, dtype=np.int64).reshape(-1)
    if lam.shape[0] != bounds.shape[0]:
        raise ConfigError("initial coefficient vector has the wrong length")
    if np.any(lam < bounds[:, 0]) or np.any(lam > bounds[:, 1]):
        raise ConfigError("initial coefficient vector violates its bounds")
    return lam


def temperature_schedule(config: SolverConfig) -> np.ndarray:
    """Linear cooling t_k = t0 - k * alpha for every t_k > t_min."""
    t0, alpha, t_min = config.sa_initial_temp, config.sa_cooling_rate, config.sa_min_temp
    if t0 <= t_min:
        return np.empty(0)
    count = int(math.ceil((t0 - t_min) / alpha)) + 1
    temps = t0 - alpha * np.arange(count)
    return temps[temps > t_min]


class _Scorer:
    """Memoized intercept search for one dataset; the box is small enough
    in practice that annealing revisits points often."""

    def __init__(self, dataset: BinaryDataset, grid: ThresholdGrid, c0: float):
        self.x = dataset.features
        self.y = dataset.labels
        self.grid = grid
        self.c0 = c0
        self.calls = 0
        self._cache: dict[tuple[int, ...], InterceptFit] = {}

    def __call__(self, lam: np.ndarray) -> InterceptFit:
        self.calls += 1
        key = tuple(int(v) for v in lam)
        hit = self._cache.get(key)
        if hit is None:
            hit = find_optimal_t(
                self.x @ lam, self.y, self.grid, self.c0, int(np.count_nonzero(lam))
            )
            self._cache[key] = hit
        return hit


def _anneal_chain(
    scorer: _Scorer,
    bounds: np.ndarray,
    lam0: np.ndarray,
    temps: np.ndarray,
    iters: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, InterceptFit, list[float]]:
    movable = np.flatnonzero(bounds[:, 1] > bounds[:, 0])
    lam = lam0.copy()
    fit = scorer(lam)
    best_lam, best_fit = lam.copy(), fit
    trace = []
    n_moves = temps.shape[0] * iters
    u_coord = rng.random(n_moves)
    u_value = rng.random(n_moves)
    u_accept = rng.random(n_moves)
    move = 0
    for t in temps:
        for _ in range(iters):
            k = movable[int(u_coord[move] * movable.shape[0])]
            lo, hi = bounds[k]
            # uniform over the box values other than the current one
            v = lo + int(u_value[move] * (hi - lo))
            if v >= lam[k]:
                v += 1
            new = lam.copy()
            new[k] = v
            new_fit = scorer(new)
            if new_fit.loss < fit.loss:
                lam, fit = new, new_fit
                if fit.loss < best_fit.loss:
                    best_lam, best_fit = lam.copy(), fit
            elif u_accept[move] < math.exp((fit.loss - new_fit.loss) / t):
                lam, fit = new, new_fit
            move += 1
        trace.append(best_fit.loss)
    return best_lam, best_fit, trace


def _better(loss, lam, best_loss, best_lam) -> bool:
    if best_lam is None or loss < best_loss:
        return True
    return loss == best_loss and tuple(lam) < tuple(best_lam)


def sa_train(
    dataset: BinaryDataset,
    grid: ThresholdGrid,
    config: SolverConfig,
    initial=None,
) -> TrainResult:
    """Simulated annealing over integer coefficients with exact intercepts.

    Each move resamples one coordinate uniformly from its box minus the
    current value. Restarts are independent chains seeded from
    ``SeedSequence(config.seed)``; the lowest loss wins, ties broken by the
    lexicographically smallest coefficient vector.
    """
    bounds = config.bounds_for(dataset.p)
    if not np.any(bounds[:, 1] > bounds[:, 0]):
        raise ConfigError("every coefficient box has a single value: no moves possible")
    lam0 = _initial_point(bounds, initial)
    temps = temperature_schedule(config)
    scorer = _Scorer(dataset, grid, config.c0)
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    best_lam = best_fit = None
    best_trace: list[float] = []
    chain_losses = []
    for ss in seeds:
        rng = np.random.Generator(np.random.PCG64(ss))
        lam, fit, trace = _anneal_chain(
            scorer, bounds, lam0, temps, config.sa_iters_per_temp, rng
        )
        chain_losses.append(fit.loss)
        if _better(fit.loss, lam, None if best_fit is None else best_fit.loss, best_lam):
            best_lam, best_fit, best_trace = lam, fit, trace
    provenance = {"solver": "sa", "config": config.to_dict(), "seed": config.seed}
    model, clamped, merged = build_model(dataset, grid, best_lam, best_fit.intercepts, provenance)
    return TrainResult(
        model,
        best_fit.loss,
        tuple(best_trace),
        scorer.calls,
        clamped,
        merged,
        tuple(chain_losses),
    )


def exact_enumerate(dataset: BinaryDataset, grid: ThresholdGrid, config: SolverConfig) -> TrainResult:
    """Global minimizer over the whole coefficient box (ties: lexicographically smallest)."""
    bounds = config.bounds_for(dataset.p)
    sizes = bounds[:, 1] - bounds[:, 0] + 1
    total = math.prod(int(v) for v in sizes)
    if total > config.enumerate_cap:
        raise ConfigError(f"coefficient box has {total} points, cap is {config.enumerate_cap}")
    scorer = _Scorer(dataset, grid, config.c0)
    best_lam = best_fit = None
    # product() walks the box in lexicographic order, so strict improvement
    # keeps the lexicographically smallest minimizer
    for point in itertools.product(*(range(lo, hi + 1) for lo, hi in bounds)):
        lam = np.array(point, dtype=np.int64)
        fit = scorer(lam)
        if best_fit is None or fit.loss < best_fit.loss:
            best_lam, best_fit = lam, fit
    provenance = {"solver": "exact", "config": config.to_dict(), "seed": config.seed}
    model, clamped, merged = build_model(dataset, grid, best_lam, best_fit.intercepts, provenance)
    return TrainResult(model, best_fit.loss, (), scorer.calls, clamped, merged)


def round_real_model(rho, t, dataset: BinaryDataset, lambda_cap: int):
    """Round a real-valued linear rule (rho, t) to integers on the scale lambda_cap.

    lambda_k = floor(rho_k * cap / ||rho||_inf + 1/2), likewise for the
    intercepts. The diagnostics report the normalized margin gamma_min, the
    largest row 1-norm, and whether cap > (||X|| + 1) / (2 gamma_min), which
    guarantees that every (sample, threshold) decision keeps its sign.
    """
    rho = np.asarray(rho, dtype=np.float64).reshape(-1)
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    x = dataset.features
    if rho.shape[0] != x.shape[1]:
        raise DataError("rho must have one entry per feature")
    scale = float(np.max(np.abs(rho))) if rho.size else 0.0
    if scale == 0.0:
        raise DataError("rho must be nonzero")
    if lambda_cap < 1:
        raise ConfigError("lambda_cap must be a positive integer")
    if np.any(np.diff(t) < 0):
        raise DataError("intercepts t must be nondecreasing")
    real_scores = x @ rho
    reach = float(np.max(np.abs(real_scores)))
    if t.size and (t[0] < -reach or t[-1] > reach):
        raise DataError("intercepts t must lie within ±max_j |x_j rho|")
    lam = np.floor(rho * lambda_cap / scale + 0.5).astype(np.int64)
    big_t = np.floor(t * lambda_cap / scale + 0.5).astype(np.int64)
    gaps = np.abs(real_scores[:, None] - t[None, :]) / scale
    gamma_min = float(gaps.min()) if gaps.size else math.inf
    x_norm = float(np.max(np.abs(x).sum(axis=1)))
    holds = gamma_min > 0 and lambda_cap > (x_norm + 1.0) / (2.0 * gamma_min)
    diagnostics = {
        "gamma_min": gamma_min,
        "x_norm": x_norm,
        "required_cap": (x_norm + 1.0) / (2.0 * gamma_min) if gamma_min > 0 else math.inf,
        "condition_holds": bool(holds),
    }
    return lam, big_t, diagnostics
