"""Command-line interface.

Exit codes: 0 success, 1 data error (bad or missing input), 2 configuration
error (bad options or config values).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bounds import (
    EnvelopeQuery,
    aunbc_bounds,
    aunbc_lower,
    auroc_lower,
    envelope_curve,
    generalization_margin,
)
from .calibration import improve_aunbc, improve_aunbc_until_stable
from .core import ConfigError, DataError, ScoreModel, SolverConfig, ThresholdGrid
from .cv import CvPlan, run_cv
from .data import BinarizationSpec, encode_features, ingest_csv, read_columns, write_csv
from .metrics import metric_report
from .milp import expected_counts, milp_export
from .report import emit_curves, emit_scorecard
from .solver import exact_enumerate, predict_many, sa_train
from .synthetic import make_rng, synth_boundary, synth_correlated

log = logging.getLogger("nbscore")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(args) -> ThresholdGrid:
    weights = None
    if args.weights and args.weights.strip().lower() != "default":
        weights = _floats(args.weights)
    if args.grid:
        return ThresholdGrid(_floats(args.grid), weights)
    return ThresholdGrid([i / 10 for i in range(1, 10)], weights)


def _config(args) -> SolverConfig:
    d = {}
    if getattr(args, "config", None):
        try:
            d = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config file must hold a JSON object")
    for key in ("c0", "seed", "restarts", "default_bound", "t_max"):
        v = getattr(args, key, None)
        if v is not None:
            d[key] = v
    try:
        config = SolverConfig.from_dict(d)
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from None
    lo, hi = getattr(args, "lambda_min", None), getattr(args, "lambda_max", None)
    if lo is not None and hi is not None and lo > hi:
        raise ConfigError(f"--lambda-min {lo} exceeds --lambda-max {hi}")
    if getattr(args, "lambda_bounds", None):
        _bounds_file(args.lambda_bounds)
    return config


def _bounds_file(path) -> dict[str, tuple[int, int]]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bounds file is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("bounds file must map feature names to [min, max]")
    out = {}
    for name, pair in raw.items():
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(v, int) for v in pair)):
            raise ConfigError(f"bounds for {name!r} must be [min, max] integers")
        if pair[0] > pair[1]:
            raise ConfigError(f"bounds for {name!r}: min exceeds max")
        out[name] = (pair[0], pair[1])
    return out


def _with_bounds(config: SolverConfig, args, names) -> SolverConfig:
    """Resolve --lambda-min/--lambda-max and the per-feature file against column names."""
    lo, hi = getattr(args, "lambda_min", None), getattr(args, "lambda_max", None)
    per = _bounds_file(args.lambda_bounds) if getattr(args, "lambda_bounds", None) else {}
    if lo is None and hi is None and not per:
        return config
    unknown = sorted(set(per) - set(names))
    if unknown:
        raise ConfigError(f"bounds file names unknown features: {unknown}")
    base = config.bounds_for(len(names))
    rows = []
    for k, name in enumerate(names):
        a = int(base[k, 0]) if lo is None else lo
        b = int(base[k, 1]) if hi is None else hi
        rows.append(per.get(name, (a, b)))
    return replace(config, lambda_bounds=tuple(rows))


def _spec(args) -> BinarizationSpec | None:
    if not getattr(args, "spec", None):
        return None
    try:
        return BinarizationSpec.load(args.spec)
    except (json.JSONDecodeError, KeyError, AttributeError) as exc:
        raise ConfigError(f"bad binarization spec: {exc}") from None


def _write_or_print(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_train(args) -> int:
    grid, config = _grid(args), _config(args)
    data = ingest_csv(args.data, args.label, _spec(args))
    config = _with_bounds(config, args, data.dataset.feature_names)
    trainer = exact_enumerate if args.solver == "exact" else sa_train
    result = trainer(data.dataset, grid, config)
    prov = dict(result.model.provenance)
    prov["spec_sha256"] = data.spec.digest()
    prov["dropped_rows"] = data.dropped
    model = replace(result.model, provenance=prov)
    Path(args.out).write_text(model.to_json() + "\n", encoding="utf-8")
    print(_dump({
        "loss": result.loss,
        "evaluations": result.evaluations,
        "clamped_bins": list(result.clamped_bins),
        "merged_bins": list(result.merged_bins),
        "num_nonzero": model.num_nonzero,
        "model": str(args.out),
    }))
    return 0


def _load_model(path) -> ScoreModel:
    try:
        return ScoreModel.from_json(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"unreadable model file: {exc}") from None


def cmd_predict(args) -> int:
    model = _load_model(args.model)
    spec = _spec(args) or BinarizationSpec.passthrough(model.feature_names)
    x = encode_features(args.data, spec)
    scores, risk = predict_many(model, x)
    write_csv(args.out, ["row", "score", "risk"], zip(range(len(scores)), scores, risk))
    return 0


def cmd_eval(args) -> int:
    cols = read_columns(args.data, [args.pred_col, args.label])
    grid = _grid(args)
    report = metric_report(cols[args.pred_col], cols[args.label], grid)
    _write_or_print(_dump(report), args.out)
    return 0


def cmd_cv(args) -> int:
    grid, config = _grid(args), _config(args)
    data = ingest_csv(args.data, args.label, _spec(args))
    config = _with_bounds(config, args, data.dataset.feature_names)
    plan = CvPlan(args.folds, args.repeats, args.cv_seed, not args.no_stratify)
    report = run_cv(
        data.dataset, grid, config, plan, args.solver, args.workers,
        {"spec_sha256": data.spec.digest(), "dropped_rows": data.dropped},
    )
    _write_or_print(_dump(report.to_dict()), args.out)
    if args.oof:
        header = ["row", "label"] + [f"risk_r{r}" for r in range(plan.repeats)]
        rows = (
            [j, int(data.dataset.labels[j]), *report.oof[:, j].tolist()]
            for j in range(data.dataset.n)
        )
        write_csv(args.oof, header, rows)
    return 0


def cmd_calibrate(args) -> int:
    cols = read_columns(args.data, [args.pred_col, args.label])
    grid = _grid(args)
    fn = improve_aunbc_until_stable if args.until_stable else improve_aunbc
    repaired, report = fn(cols[args.pred_col], cols[args.label], grid, args.preserve_order)
    write_csv(
        args.out, ["row", "label", "original", "repaired"],
        zip(range(len(repaired)), cols[args.label].astype(int), cols[args.pred_col], repaired),
    )
    text = _dump(report.to_dict())
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_synth(args) -> int:
    if args.labels:
        labels = read_columns(args.labels, [args.label_col])[args.label_col]
        if not np.all(np.isin(labels, (0, 1))):
            raise DataError(f"column {args.label_col!r} must hold 0/1 labels")
        labels = labels.astype(np.int64)
    else:
        n_pos = int(round(args.n * args.prevalence))
        if not 0 < n_pos < args.n:
            raise ConfigError("prevalence must leave both classes nonempty")
        labels = np.zeros(args.n, dtype=np.int64)
        labels[:n_pos] = 1
    if args.type == 1:
        preds = synth_correlated(labels, args.r, make_rng(args.seed))
    else:
        preds = synth_boundary(labels, args.auroc, _grid(args))
    write_csv(args.out, ["label", "pred"], zip(labels, preds))
    return 0


def cmd_bounds(args) -> int:
    grid = _grid(args)
    query = EnvelopeQuery(args.a0, grid)
    out: dict = {"a0": args.a0, "aunbc_lower": aunbc_lower(query)}
    if args.auroc is not None:
        _, hi = aunbc_bounds(args.auroc, query)
        out.update({"auroc": args.auroc, "aunbc_upper": hi})
    if args.aunbc is not None:
        out.update({"aunbc": args.aunbc, "auroc_lower": auroc_lower(args.aunbc, query)})
    if args.n is not None:
        out["generalization_margin"] = generalization_margin(
            args.size_l, args.size_t, args.delta, args.n, grid
        )
    if args.curve:
        write_csv(args.curve, ["auroc", "aunbc_upper", "aunbc_lower"], envelope_curve(query).tolist())
    print(_dump(out))
    return 0


def cmd_dca(args) -> int:
    cols = read_columns(args.data, [args.pred_col, args.label])
    paths = emit_curves(cols[args.pred_col], cols[args.label], _grid(args), args.out_dir)
    print(_dump({k: str(v) for k, v in paths.items()}))
    return 0


def cmd_export_milp(args) -> int:
    grid, config = _grid(args), _config(args)
    data = ingest_csv(args.data, args.label, _spec(args))
    config = _with_bounds(config, args, data.dataset.feature_names)
    export = milp_export(data.dataset, grid, config, args.gamma)
    Path(args.out).write_text(export.to_lp(), encoding="utf-8")
    ds = data.dataset
    counts = {
        "variables": len(export.variables),
        "pos_rows": export.count_rows("pos_"),
        "neg_rows": export.count_rows("neg_"),
        "link_rows": export.count_rows("link_"),
        "mono_rows": export.count_rows("mono_"),
    }
    print(_dump({"counts": counts, "expected": expected_counts(ds.n, grid.m, ds.p, ds.n_pos)}))
    return 0


def cmd_scorecard(args) -> int:
    model = _load_model(args.model)
    _write_or_print(emit_scorecard(model, _spec(args)), args.out)
    return 0


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--thresholds", "--grid", dest="grid",
                   help="comma-separated inner thresholds (default 0.1,...,0.9)")
    p.add_argument("--weights", help="comma-separated weights w_0..w_M, or 'default' for spacings")


def _add_config(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with solver settings")
    p.add_argument("--c0", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--default-bound", dest="default_bound", type=int)
    p.add_argument("--t-max", dest="t_max", type=int)
    p.add_argument("--lambda-min", dest="lambda_min", type=int, help="lower coefficient bound, all features")
    p.add_argument("--lambda-max", dest="lambda_max", type=int, help="upper coefficient bound, all features")
    p.add_argument("--lambda-bounds", dest="lambda_bounds",
                   help='JSON file {"feature": [min, max]} overriding the global bounds')


def _add_labeled(p: argparse.ArgumentParser, spec: bool = True) -> None:
    p.add_argument("--data", required=True, help="input CSV")
    p.add_argument("--label-col", "--label", dest="label", required=True, help="label column (0/1)")
    if spec:
        p.add_argument("--spec", help="binarization spec JSON")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nbscore", description="Net-benefit integer scoring systems")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a scoring system")
    _add_labeled(p)
    _add_grid(p)
    _add_config(p)
    p.add_argument("--solver", choices=("sa", "exact"), default="sa")
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score rows with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--spec")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="metrics for a prediction column")
    _add_labeled(p, spec=False)
    p.add_argument("--pred-col", default="pred")
    p.add_argument("--out")
    _add_grid(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cv", help="repeated k-fold cross-validation")
    _add_labeled(p)
    _add_grid(p)
    _add_config(p)
    p.add_argument("--solver", choices=("sa", "exact"), default="sa")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--cv-seed", type=int, default=0)
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="report JSON path (default stdout)")
    p.add_argument("--oof", help="CSV path for out-of-fold predictions")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("calibrate", help="AUNBC-improving prediction repair")
    _add_labeled(p, spec=False)
    p.add_argument("--pred-col", default="pred")
    p.add_argument("--preserve-order", action="store_true")
    p.add_argument("--until-stable", action="store_true")
    p.add_argument("--report", help="JSON path for the repair report")
    p.add_argument("--out", required=True)
    _add_grid(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("synth", help="synthetic prediction vectors")
    p.add_argument("--type", type=int, choices=(1, 2), default=1,
                   help="1: controlled correlation, 2: envelope-attaining")
    p.add_argument("--r", type=float, default=0.5, help="target correlation (type 1)")
    p.add_argument("--auroc", type=float, default=0.8, help="target AUROC (type 2)")
    p.add_argument("--labels", help="CSV holding the label vector")
    p.add_argument("--label-col", default="label")
    p.add_argument("--n", type=int, default=1000, help="sample size when no labels CSV is given")
    p.add_argument("--prevalence", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_grid(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bounds", help="AUROC/AUNBC envelope and generalization margin")
    p.add_argument("--a0", type=float, required=True, help="prevalence")
    p.add_argument("--auroc", type=float)
    p.add_argument("--aunbc", type=float)
    p.add_argument("--n", type=int, help="sample size for the generalization margin")
    p.add_argument("--size-l", type=int, default=21)
    p.add_argument("--size-t", type=int, default=201)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--curve", help="CSV path for the sampled envelope")
    _add_grid(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("dca", help="ROC, calibration and decision-curve CSVs")
    _add_labeled(p, spec=False)
    p.add_argument("--pred-col", default="pred")
    p.add_argument("--out-dir", required=True)
    _add_grid(p)
    p.set_defaults(func=cmd_dca)

    p = sub.add_parser("export-milp", help="write the training problem as an LP file")
    _add_labeled(p)
    _add_grid(p)
    _add_config(p)
    p.add_argument("--gamma", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_milp)

    p = sub.add_parser("scorecard", help="points and risk-band tables for a model")
    p.add_argument("--model", required=True)
    p.add_argument("--spec")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scorecard)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # remaining ValueErrors come from out-of-domain option values
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
