"""Big-M mixed-integer formulation of the training problem, written as LP text.

Variables: phi_i_j (sample j predicted positive at threshold i), alpha_k
(coefficient k nonzero), lam_k (integer coefficient) and T_i (integer
intercept). No solver is bundled; the text is meant for CPLEX/Gurobi/HiGHS/
CBC, and ``verify_solution`` checks a returned (lambda, T) pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BinaryDataset, SolverConfig, ThresholdGrid
from .metrics import confusion_from_scores, weighted_objective

VERIFY_TOL = 1e-9


@dataclass(frozen=True)
class Row:
    name: str
    terms: tuple[tuple[str, float], ...]
    sense: str  # "<=", ">=" or "="
    rhs: float

    def activity(self, values: dict[str, float]) -> float:
        return sum(c * values[v] for v, c in self.terms)

    def satisfied(self, values: dict[str, float], tol: float = 1e-9) -> bool:
        a = self.activity(values)
        if self.sense == "<=":
            return a <= self.rhs + tol
        if self.sense == ">=":
            return a >= self.rhs - tol
        return abs(a - self.rhs) <= tol


@dataclass(frozen=True, eq=False)
class MilpExport:
    binaries: tuple[str, ...]
    integers: tuple[str, ...]
    bounds: dict[str, tuple[float, float]]
    objective: dict[str, float]
    rows: tuple[Row, ...]
    big_m: np.ndarray
    gamma: float
    c0: float
    n: int
    m: int
    p: int
    grid: ThresholdGrid

    @property
    def variables(self) -> tuple[str, ...]:
        return self.binaries + self.integers

    def count_rows(self, prefix: str) -> int:
        return sum(1 for r in self.rows if r.name.startswith(prefix))

    def to_lp(self) -> str:
        return write_lp(self)


def phi(i: int, j: int) -> str:
    return f"phi_{i}_{j}"


def expected_counts(n: int, m: int, p: int, n_pos: int) -> dict[str, int]:
    """Closed-form sizes of the formulation's index sets."""
    return {
        "variables": (m + 1) * n + 2 * p + (m + 1),
        "pos_rows": (m + 1) * n_pos,
        "neg_rows": (m + 1) * (n - n_pos),
        "link_rows": 2 * p,
        "mono_rows": m,
    }


def milp_export(
    dataset: BinaryDataset,
    grid: ThresholdGrid,
    config: SolverConfig,
    gamma: float | None = None,
) -> MilpExport:
    """Build the formulation. H_j = gamma + ||x_j||_1 max_k Lambda_k + T_max
    dominates every score-minus-intercept gap, so each big-M row is valid."""
    x = dataset.features
    y = dataset.labels
    n, p = x.shape
    m = grid.m
    gamma = config.gamma if gamma is None else float(gamma)
    bounds = config.bounds_for(p)
    cap = np.max(np.abs(bounds), axis=1)
    h = gamma + np.abs(x).sum(axis=1) * float(cap.max()) + config.t_max

    lam = [f"lam_{k}" for k in range(p)]
    alpha = [f"alpha_{k}" for k in range(p)]
    tvars = [f"T_{i}" for i in range(m + 1)]
    phis = [phi(i, j) for i in range(m + 1) for j in range(n)]

    objective: dict[str, float] = {}
    for i in range(m + 1):
        w = grid.weights[i]
        for j in range(n):
            if y[j] == 1:
                coef = -w / n
            else:
                coef = w * grid.odds[i] / n
            if coef != 0.0:
                objective[phi(i, j)] = coef
    for k in range(p):
        if config.c0:
            objective[alpha[k]] = config.c0

    rows: list[Row] = []
    for i in range(m + 1):
        for j in range(n):
            score = tuple((lam[k], -float(x[j, k])) for k in range(p) if x[j, k] != 0)
            if y[j] == 1:
                # H_j (1 - phi) >= T_i - x_j lam
                rows.append(
                    Row(f"pos_{i}_{j}", ((phi(i, j), float(h[j])), (tvars[i], 1.0)) + score, "<=", float(h[j]))
                )
            else:
                # H_j phi >= gamma + x_j lam - T_i
                rows.append(
                    Row(f"neg_{i}_{j}", ((phi(i, j), float(h[j])), (tvars[i], 1.0)) + score, ">=", gamma)
                )
    for k in range(p):
        lo, hi = (int(v) for v in bounds[k])
        rows.append(Row(f"link_hi_{k}", ((lam[k], 1.0), (alpha[k], -float(hi))), "<=", 0.0))
        rows.append(Row(f"link_lo_{k}", ((lam[k], 1.0), (alpha[k], -float(lo))), ">=", 0.0))
    for i in range(m):
        rows.append(Row(f"mono_{i}", ((tvars[i], 1.0), (tvars[i + 1], -1.0)), "<=", 0.0))

    var_bounds = {lam[k]: (float(bounds[k, 0]), float(bounds[k, 1])) for k in range(p)}
    var_bounds.update({t: (-float(config.t_max), float(config.t_max)) for t in tvars})
    return MilpExport(
        binaries=tuple(phis + alpha),
        integers=tuple(lam + tvars),
        bounds=var_bounds,
        objective=objective,
        rows=tuple(rows),
        big_m=h,
        gamma=gamma,
        c0=config.c0,
        n=n,
        m=m,
        p=p,
        grid=grid,
    )


def _fmt(v: float) -> str:
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def _expr(terms) -> str:
    parts = []
    for name, c in terms:
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        parts.append(f"{sign} {name}" if mag == 1 else f"{sign} {_fmt(mag)} {name}")
    text = " ".join(parts) if parts else "0"
    return text[2:] if text.startswith("+ ") else text


def _wrap(text: str, width: int = 200) -> str:
    # LP readers cap line length; continuation lines start with whitespace
    indent = text[: len(text) - len(text.lstrip(" "))]
    out, line = [], indent
    for tok in text.split():
        if len(line) + len(tok) + 1 > width:
            out.append(line)
            line = "   " + tok
        else:
            line = f"{line} {tok}" if line.strip() else line + tok
    out.append(line)
    return "\n".join(out)


def write_lp(export: MilpExport) -> str:
    lines = ["\\ weighted net benefit scoring system", "Minimize"]
    order = {v: i for i, v in enumerate(export.variables)}
    obj = sorted(export.objective.items(), key=lambda item: order[item[0]])
    lines.append(_wrap(" obj: " + _expr(obj)))
    lines.append("Subject To")
    for r in export.rows:
        lines.append(_wrap(f" {r.name}: {_expr(r.terms)} {r.sense} {_fmt(r.rhs)}"))
    lines.append("Bounds")
    for name, (lo, hi) in export.bounds.items():
        lines.append(f" {_fmt(lo)} <= {name} <= {_fmt(hi)}")
    lines.append("Generals")
    lines.append(_wrap(" " + " ".join(export.integers)))
    lines.append("Binaries")
    lines.append(_wrap(" " + " ".join(export.binaries)))
    lines.append("End")
    return "\n".join(lines) + "\n"


def assignment_from_solution(export: MilpExport, dataset: BinaryDataset, lam, t) -> dict[str, float]:
    """Full variable assignment implied by (lambda, T): phi = 1 iff score >= T_i."""
    lam = np.asarray(lam, dtype=np.int64)
    t = np.asarray(t, dtype=np.int64)
    scores = dataset.features @ lam
    values: dict[str, float] = {}
    for k in range(export.p):
        values[f"lam_{k}"] = float(lam[k])
        values[f"alpha_{k}"] = float(lam[k] != 0)
    for i in range(export.m + 1):
        values[f"T_{i}"] = float(t[i])
        for j in range(export.n):
            values[phi(i, j)] = float(scores[j] >= t[i])
    return values


def lp_objective(export: MilpExport, values: dict[str, float]) -> float:
    return float(sum(c * values[v] for v, c in export.objective.items()))


def verify_solution(export: MilpExport, dataset: BinaryDataset, lam, t) -> dict:
    """Check an external (lambda, T) against the formulation and the direct objective."""
    values = assignment_from_solution(export, dataset, lam, t)
    lp_value = lp_objective(export, values)
    lam = np.asarray(lam, dtype=np.int64)
    violated = [r.name for r in export.rows if not r.satisfied(values)]
    in_bounds = all(lo <= values[v] <= hi for v, (lo, hi) in export.bounds.items())
    direct = None
    if np.all(np.diff(np.asarray(t)) >= 0):
        curve = confusion_from_scores(dataset.features @ lam, dataset.labels, t)
        direct = weighted_objective(curve, export.grid, int(np.count_nonzero(lam)), export.c0)
    return {
        "lp_objective": lp_value,
        "objective": direct,
        "agree": direct is not None and abs(lp_value - direct) <= VERIFY_TOL,
        "feasible": not violated and in_bounds,
        "violated_rows": violated,
    }
