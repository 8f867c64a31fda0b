"""Domain types shared across the package.

Everything here is immutable after construction: numpy arrays are copied and
flagged read-only, dataclasses are frozen.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

WEIGHT_TOL = 1e-12
MODEL_FORMAT_VERSION = 1


class DataError(ValueError):
    """Input data violates a contract (bad shape, label, or value)."""


class ConfigError(ValueError):
    """A configuration is infeasible or internally inconsistent."""


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BinaryDataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def p(self) -> int:
        return int(self.features.shape[1])

    @property
    def n_pos(self) -> int:
        return int(self.labels.sum())

    @property
    def n_neg(self) -> int:
        return self.n - self.n_pos

    @property
    def prevalence(self) -> float:
        return self.n_pos / self.n

    def subset(self, idx) -> "BinaryDataset":
        idx = np.asarray(idx)
        return BinaryDataset(
            _frozen(self.features[idx], np.float64),
            _frozen(self.labels[idx], np.int64),
            self.feature_names,
        )

    def require_both_classes(self) -> None:
        if self.n_pos == 0 or self.n_neg == 0:
            raise DataError("degenerate labels: both classes required")


def validate_dataset(features, labels, names: Sequence[str] | None = None) -> BinaryDataset:
    """Check shapes, labels and finiteness; return an immutable dataset."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if x.size == 0 or y.size == 0:
        raise DataError("N ≥ 1 required")
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise DataError(f"features must be a 2-D matrix, got {x.ndim} dimensions")
    if y.ndim != 1 or y.shape[0] != x.shape[0]:
        raise DataError(
            f"dimension mismatch: {x.shape[0]} feature rows vs {y.reshape(-1).shape[0]} labels"
        )
    if x.shape[1] < 1:
        raise DataError("P ≥ 1 required")
    bad = ~np.isin(y, (0, 1))
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise DataError(f"non-binary label at row {row}")
    finite = np.isfinite(x)
    if not finite.all():
        row, col = (int(v) for v in np.argwhere(~finite)[0])
        raise DataError(f"non-finite feature value at row {row}, column {col}")
    if names is None:
        names = [f"x{k}" for k in range(x.shape[1])]
    names = tuple(str(s) for s in names)
    if len(names) != x.shape[1]:
        raise DataError(f"dimension mismatch: {len(names)} names for {x.shape[1]} columns")
    return BinaryDataset(_frozen(x, np.float64), _frozen(y, np.int64), names)


@dataclass(frozen=True, eq=False)
class ThresholdGrid:
    """Decision thresholds p_1 < ... < p_M inside (0, 1) and weights w_0..w_M.

    The sentinels p_0 = 0 and p_{M+1} = 1 are implied. When ``weights`` is
    omitted, w_i = p_{i+1} - p_i, which turns the weighted net benefit into
    the area under the net-benefit curve.
    """

    inner: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        p = np.asarray(self.inner, dtype=np.float64).reshape(-1)
        if p.size and (not np.all(np.isfinite(p)) or p[0] <= 0.0 or p[-1] >= 1.0):
            raise ConfigError("inner thresholds must lie strictly inside (0, 1)")
        if np.any(np.diff(p) <= 0):
            raise ConfigError("inner thresholds must be strictly increasing")
        full = np.concatenate(([0.0], p, [1.0]))
        if self.weights is None:
            w = np.diff(full)
        else:
            w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
            if w.shape[0] != p.shape[0] + 1:
                raise ConfigError(f"expected {p.shape[0] + 1} weights, got {w.shape[0]}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ConfigError("weights must be finite and nonnegative")
        if abs(math.fsum(w) - 1.0) > WEIGHT_TOL:
            raise ConfigError(f"weights must sum to 1 (got {math.fsum(w)!r})")
        object.__setattr__(self, "inner", _frozen(p, np.float64))
        object.__setattr__(self, "weights", _frozen(w, np.float64))
        object.__setattr__(self, "_full", _frozen(full, np.float64))
        odds = full[:-1] / (1.0 - full[:-1])
        object.__setattr__(self, "_odds", _frozen(odds, np.float64))

    @classmethod
    def uniform(cls, m: int) -> "ThresholdGrid":
        """Grid p_i = i/(m+1), i = 1..m, with the default spacing weights."""
        return cls([i / (m + 1) for i in range(1, m + 1)])

    @property
    def m(self) -> int:
        return int(self.inner.shape[0])

    @property
    def full(self) -> np.ndarray:
        """p_0..p_{M+1} including both sentinels."""
        return self._full

    @property
    def odds(self) -> np.ndarray:
        """p_i / (1 - p_i) for i = 0..M."""
        return self._odds

    @property
    def spacing(self) -> np.ndarray:
        """p_{i+1} - p_i for i = 0..M."""
        return np.diff(self._full)

    def __eq__(self, other):
        if not isinstance(other, ThresholdGrid):
            return NotImplemented
        return np.array_equal(self.inner, other.inner) and np.array_equal(
            self.weights, other.weights
        )

    def __hash__(self):
        return hash((self.inner.tobytes(), self.weights.tobytes()))


@dataclass(frozen=True, eq=False)
class ConfusionCurve:
    """TP_i and FP_i for i = 0..M+1.

    Curves built from predictions always have TP_0 = n_pos; curves built
    from integer scores and an arbitrary first intercept may not, so the
    constructor only checks bounds and monotonicity.
    """

    tp: np.ndarray
    fp: np.ndarray
    n_pos: int
    n_neg: int

    def __post_init__(self):
        tp = np.asarray(self.tp, dtype=np.int64)
        fp = np.asarray(self.fp, dtype=np.int64)
        if tp.shape != fp.shape or tp.ndim != 1 or tp.shape[0] < 2:
            raise DataError("tp and fp must be equal-length vectors of length M+2")
        if np.any(np.diff(tp) > 0) or np.any(np.diff(fp) > 0):
            raise DataError("confusion counts must be nonincreasing in the threshold index")
        if tp.min() < 0 or fp.min() < 0 or tp.max() > self.n_pos or fp.max() > self.n_neg:
            raise DataError("confusion counts out of range")
        object.__setattr__(self, "tp", _frozen(tp, np.int64))
        object.__setattr__(self, "fp", _frozen(fp, np.int64))
        object.__setattr__(self, "n_pos", int(self.n_pos))
        object.__setattr__(self, "n_neg", int(self.n_neg))

    @property
    def n(self) -> int:
        return self.n_pos + self.n_neg

    @property
    def m(self) -> int:
        return int(self.tp.shape[0]) - 2


def as_predictions(scores, n: int | None = None) -> np.ndarray:
    """Validate a prediction vector (entries in [0, 1], optional length check)."""
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    if n is not None and s.shape[0] != n:
        raise DataError(f"length mismatch: {s.shape[0]} predictions for {n} labels")
    if not np.all(np.isfinite(s)) or np.any(s < 0.0) or np.any(s > 1.0):
        raise DataError("predictions must lie in [0, 1]")
    return s


def as_labels(labels) -> np.ndarray:
    y = np.asarray(labels).reshape(-1)
    bad = ~np.isin(y, (0, 1))
    if bad.any():
        raise DataError(f"non-binary label at row {int(np.flatnonzero(bad)[0])}")
    return y.astype(np.int64)


@dataclass(frozen=True)
class SolverConfig:
    """Training hyperparameters.

    Defaults follow the experimental protocol: C0 = 1e-3, coefficients in
    {-10..10}, linear cooling from 1e-3 by 1e-6 down to 0 with 10 moves per
    temperature.
    """

    c0: float = 1e-3
    lambda_bounds: tuple[tuple[int, int], ...] = ()
    default_bound: int = 10
    t_max: int = 100
    sa_initial_temp: float = 1e-3
    sa_cooling_rate: float = 1e-6
    sa_min_temp: float = 0.0
    sa_iters_per_temp: int = 10
    seed: int = 0
    restarts: int = 1
    gamma: float = 0.5
    enumerate_cap: int = 10**6

    def __post_init__(self):
        if not (self.c0 >= 0):
            raise ConfigError("c0 must be nonnegative")
        bounds = tuple((int(lo), int(hi)) for lo, hi in self.lambda_bounds)
        for k, (lo, hi) in enumerate(bounds):
            if lo > hi:
                raise ConfigError(f"coefficient bounds for feature {k}: lo > hi")
        object.__setattr__(self, "lambda_bounds", bounds)
        if self.default_bound < 0:
            raise ConfigError("default_bound must be nonnegative")
        if self.t_max < 1:
            raise ConfigError("t_max must be a positive integer")
        if self.sa_min_temp < 0 or self.sa_initial_temp < 0 or self.sa_cooling_rate < 0:
            raise ConfigError("annealing temperatures and cooling rate must be nonnegative")
        if self.sa_min_temp > self.sa_initial_temp:
            raise ConfigError("sa_min_temp must not exceed sa_initial_temp")
        if self.sa_initial_temp > self.sa_min_temp and self.sa_cooling_rate <= 0:
            raise ConfigError("sa_cooling_rate must be positive")
        if self.sa_iters_per_temp < 1 or self.restarts < 1:
            raise ConfigError("sa_iters_per_temp and restarts must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not self.gamma > 0:
            raise ConfigError("gamma must be positive")

    def bounds_for(self, p: int) -> np.ndarray:
        """(P, 2) integer array of per-feature [lo, hi] bounds."""
        if self.lambda_bounds:
            if len(self.lambda_bounds) != p:
                raise ConfigError(
                    f"{len(self.lambda_bounds)} coefficient bounds given for {p} features"
                )
            return np.array(self.lambda_bounds, dtype=np.int64)
        b = self.default_bound
        return np.tile(np.array([[-b, b]], dtype=np.int64), (p, 1))

    def to_dict(self) -> dict[str, Any]:
        return {
            "c0": self.c0,
            "lambda_bounds": [list(b) for b in self.lambda_bounds],
            "default_bound": self.default_bound,
            "t_max": self.t_max,
            "sa_initial_temp": self.sa_initial_temp,
            "sa_cooling_rate": self.sa_cooling_rate,
            "sa_min_temp": self.sa_min_temp,
            "sa_iters_per_temp": self.sa_iters_per_temp,
            "seed": self.seed,
            "restarts": self.restarts,
            "gamma": self.gamma,
            "enumerate_cap": self.enumerate_cap,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SolverConfig":
        d = dict(d)
        d["lambda_bounds"] = tuple(tuple(b) for b in d.get("lambda_bounds", ()))
        return cls(**d)


@dataclass(frozen=True, eq=False)
class ScoreModel:
    """Integer scoring system: score = x . coefficients, banded by intercepts.

    ``risk_levels[i]`` is the predicted risk for scores in
    [intercepts[i], intercepts[i+1]) (bin 0 also takes everything below
    intercepts[1]; the last bin is closed above).
    """

    coefficients: np.ndarray
    intercepts: np.ndarray
    risk_levels: np.ndarray
    grid: ThresholdGrid
    feature_names: tuple[str, ...]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.coefficients)
        t = np.asarray(self.intercepts)
        if not np.array_equal(lam, np.round(lam)) or not np.array_equal(t, np.round(t)):
            raise ConfigError("coefficients and intercepts must be integers")
        lam = lam.astype(np.int64)
        t = t.astype(np.int64)
        q = np.asarray(self.risk_levels, dtype=np.float64)
        m = self.grid.m
        if t.shape != (m + 1,) or q.shape != (m + 1,):
            raise ConfigError(f"expected {m + 1} intercepts and risk levels")
        if np.any(np.diff(t) < 0):
            raise ConfigError("intercepts must be nondecreasing")
        if len(self.feature_names) != lam.shape[0]:
            raise ConfigError("one feature name per coefficient required")
        full = self.grid.full
        lo_ok = q >= full[:-1]
        hi_ok = q < full[1:]
        hi_ok[-1] = q[-1] <= 1.0
        if not np.all(lo_ok & hi_ok):
            raise ConfigError("risk level outside its threshold bin")
        object.__setattr__(self, "coefficients", _frozen(lam, np.int64))
        object.__setattr__(self, "intercepts", _frozen(t, np.int64))
        object.__setattr__(self, "risk_levels", _frozen(q, np.float64))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def num_nonzero(self) -> int:
        return int(np.count_nonzero(self.coefficients))

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": MODEL_FORMAT_VERSION,
            "feature_names": list(self.feature_names),
            "coefficients": [int(v) for v in self.coefficients],
            "intercepts": [int(v) for v in self.intercepts],
            "thresholds": [float(v) for v in self.grid.inner],
            "weights": [float(v) for v in self.grid.weights],
            "risk_levels": [float(v) for v in self.risk_levels],
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        # key order is part of the file format, so no sort_keys here
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScoreModel":
        if d.get("version") != MODEL_FORMAT_VERSION:
            raise ConfigError(f"unsupported model format version {d.get('version')!r}")
        grid = ThresholdGrid(d["thresholds"], d["weights"])
        return cls(
            coefficients=d["coefficients"],
            intercepts=d["intercepts"],
            risk_levels=d["risk_levels"],
            grid=grid,
            feature_names=tuple(d["feature_names"]),
            provenance=d.get("provenance", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "ScoreModel":
        return cls.from_dict(json.loads(text))
