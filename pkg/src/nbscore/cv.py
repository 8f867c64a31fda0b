"""Repeated k-fold cross-validation of the annealing trainer."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .core import BinaryDataset, ConfigError, DataError, SolverConfig, ThresholdGrid
from .metrics import auroc_binned, aunbc, bin_stats, confusion_at_thresholds, ece
from .solver import exact_enumerate, predict_many, sa_train

METRICS = ("auroc", "aunbc", "ece", "size")


@dataclass(frozen=True)
class CvPlan:
    folds: int = 10
    repeats: int = 1
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


def fold_assignment(labels, plan: CvPlan) -> np.ndarray:
    """Array of shape (repeats, N) giving each sample's test fold per repeat.

    Stratified plans shuffle each class separately and deal it round-robin,
    the negatives continuing where the positives stopped, so fold sizes and
    per-fold positive counts each differ by at most one.
    """
    y = np.asarray(labels)
    n = y.shape[0]
    if n < plan.folds:
        raise DataError(f"N={n} is smaller than the fold count {plan.folds}")
    out = np.empty((plan.repeats, n), dtype=np.int64)
    for r, ss in enumerate(np.random.SeedSequence(plan.seed).spawn(plan.repeats)):
        rng = np.random.Generator(np.random.PCG64(ss))
        if plan.stratified:
            pos = rng.permutation(np.flatnonzero(y == 1))
            neg = rng.permutation(np.flatnonzero(y == 0))
            order = np.concatenate([pos, neg])
        else:
            order = rng.permutation(n)
        out[r, order] = np.arange(n) % plan.folds
    return out


def _fold_seed(plan: CvPlan, repeat: int, fold: int) -> int:
    ss = np.random.SeedSequence(plan.seed, spawn_key=(repeat, fold))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def _evaluate(model, data: BinaryDataset, grid: ThresholdGrid) -> tuple[dict, np.ndarray]:
    _, risk = predict_many(model, data.features)
    curve = confusion_at_thresholds(risk, data.labels, grid)
    stats = bin_stats(risk, data.labels, grid)
    metrics = {
        "auroc": auroc_binned(curve),
        "aunbc": aunbc(curve, grid),
        "ece": ece(stats, data.n),
        "size": model.num_nonzero,
    }
    return metrics, risk


def _run_fold(args) -> dict:
    dataset, grid, config, train_idx, test_idx, repeat, fold, solver = args
    train = dataset.subset(train_idx)
    test = dataset.subset(test_idx)
    for name, part in (("training", train), ("test", test)):
        if part.n_pos == 0 or part.n_neg == 0:
            raise DataError(f"repeat {repeat} fold {fold}: {name} split has a single class")
    if solver == "exact":
        result = exact_enumerate(train, grid, config)
    else:
        result = sa_train(train, grid, config)
    train_metrics, _ = _evaluate(result.model, train, grid)
    test_metrics, risk = _evaluate(result.model, test, grid)
    return {
        "repeat": repeat,
        "fold": fold,
        "seed": config.seed,
        "n_train": train.n,
        "n_test": test.n,
        "train": train_metrics,
        "test": test_metrics,
        "loss": result.loss,
        "clamped_bins": list(result.clamped_bins),
        "coefficients": result.model.coefficients.tolist(),
        "intercepts": result.model.intercepts.tolist(),
        "_risk": risk,
        "_test_idx": test_idx,
    }


@dataclass(frozen=True, eq=False)
class CvReport:
    folds: list[dict]
    aggregate: dict
    oof: np.ndarray  # (repeats, N) out-of-fold risk predictions
    assignment: np.ndarray
    provenance: dict

    def to_dict(self) -> dict:
        return {
            "folds": self.folds,
            "aggregate": self.aggregate,
            "provenance": self.provenance,
        }


def _aggregate(folds: list[dict]) -> dict:
    out = {}
    for split in ("train", "test"):
        block = {}
        for key in METRICS:
            vals = np.array([f[split][key] for f in folds], dtype=np.float64)
            block[key] = {
                "mean": float(np.mean(vals)),
                "std": float(np.std(vals, ddof=1)) if vals.shape[0] > 1 else 0.0,
            }
        out[split] = block
    return out


def run_cv(
    dataset: BinaryDataset,
    grid: ThresholdGrid,
    config: SolverConfig,
    plan: CvPlan,
    solver: str = "sa",
    workers: int = 1,
    extra_provenance: dict | None = None,
) -> CvReport:
    """Train on each fold's complement and evaluate on the held-out fold.

    Standard deviations use ddof=1. Fold jobs may run in parallel; results
    are reassembled in (repeat, fold) order, so the report does not depend
    on ``workers``.
    """
    if solver not in ("sa", "exact"):
        raise ConfigError(f"unknown solver {solver!r}")
    dataset.require_both_classes()
    assignment = fold_assignment(dataset.labels, plan)
    jobs = []
    for r in range(plan.repeats):
        for f in range(plan.folds):
            test_idx = np.flatnonzero(assignment[r] == f)
            train_idx = np.flatnonzero(assignment[r] != f)
            cfg = replace(config, seed=_fold_seed(plan, r, f))
            jobs.append((dataset, grid, cfg, train_idx, test_idx, r, f, solver))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_fold, jobs))
    else:
        results = [_run_fold(j) for j in jobs]
    oof = np.full((plan.repeats, dataset.n), np.nan)
    for res in results:
        oof[res["repeat"], res.pop("_test_idx")] = res.pop("_risk")
    provenance = {
        "plan": asdict(plan),
        "config": config.to_dict(),
        "grid": {"thresholds": grid.inner.tolist(), "weights": grid.weights.tolist()},
        "solver": solver,
        "n": dataset.n,
        "n_pos": dataset.n_pos,
        **(extra_provenance or {}),
    }
    return CvReport(results, _aggregate(results), oof, assignment, provenance)
