"""CSV ingestion with explicit per-column encodings.

A binarization spec is a JSON object mapping column names to rules:

    {"nodule_type": {"rule": "ordinal", "categories": ["pure GGO", "part-solid", "solid"]},
     "smoking":     {"rule": "onehot",  "categories": ["never", "former", "current"]},
     "size_mm":     {"rule": "cuts",    "cuts": [10, 20]},
     "lobulation":  {"rule": "pass",    "labels": {"0": "Absent", "1": "Present"}}}

``cuts`` intervals are closed on the right: with cuts [5, 10] the codes are
0 for v <= 5, 1 for 5 < v <= 10 and 2 for v > 10.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import BinaryDataset, DataError, validate_dataset

log = logging.getLogger(__name__)

MISSING = {"", "na", "nan", "null", "none", "?"}
RULES = ("pass", "onehot", "ordinal", "cuts")


@dataclass(frozen=True)
class ColumnRule:
    kind: str
    categories: tuple[str, ...] = ()
    cuts: tuple[float, ...] = ()
    labels: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.kind not in RULES:
            raise DataError(f"unknown rule {self.kind!r}")
        if self.kind in ("onehot", "ordinal") and not self.categories:
            raise DataError(f"{self.kind} rule needs categories")
        if self.kind == "cuts":
            if not self.cuts:
                raise DataError("cuts rule needs at least one cut point")
            if any(b <= a for a, b in zip(self.cuts, self.cuts[1:])):
                raise DataError("cut points must be strictly increasing")

    def output_names(self, name: str) -> list[str]:
        if self.kind == "onehot":
            return [f"{name}={c}" for c in self.categories]
        return [name]

    def encode(self, name: str, raw: list[str]) -> np.ndarray:
        if self.kind == "pass":
            try:
                return np.array([float(v) for v in raw])[:, None]
            except ValueError as exc:
                raise DataError(f"non-numeric cell in pass-through column {name!r}: {exc}") from None
        if self.kind == "cuts":
            try:
                vals = np.array([float(v) for v in raw])
            except ValueError as exc:
                raise DataError(f"non-numeric cell in column {name!r}: {exc}") from None
            return np.searchsorted(np.array(self.cuts), vals, side="left").astype(float)[:, None]
        index = {c: i for i, c in enumerate(self.categories)}
        unknown = sorted({v for v in raw if v not in index})
        if unknown:
            raise DataError(f"unlisted category {unknown[0]!r} in column {name!r}")
        codes = np.array([index[v] for v in raw])
        if self.kind == "ordinal":
            return codes.astype(float)[:, None]
        return np.eye(len(self.categories))[codes]

    def levels(self) -> list[tuple[str, np.ndarray]]:
        """Category labels with their encoded values, for scorecards."""
        if self.kind == "ordinal":
            return [(c, np.array([float(i)])) for i, c in enumerate(self.categories)]
        if self.kind == "onehot":
            eye = np.eye(len(self.categories))
            return [(c, eye[i]) for i, c in enumerate(self.categories)]
        if self.kind == "cuts":
            cuts = [_num(c) for c in self.cuts]
            out = [(f"<= {cuts[0]}", np.array([0.0]))]
            for i in range(1, len(cuts)):
                out.append((f"> {cuts[i - 1]}, <= {cuts[i]}", np.array([float(i)])))
            out.append((f"> {cuts[-1]}", np.array([float(len(cuts))])))
            return out
        if self.labels:
            return [(lab, np.array([float(v)])) for v, lab in self.labels]
        return [("0", np.array([0.0])), ("1", np.array([1.0]))]

    def to_dict(self) -> dict:
        d: dict = {"rule": self.kind}
        if self.categories:
            d["categories"] = list(self.categories)
        if self.cuts:
            d["cuts"] = list(self.cuts)
        if self.labels:
            d["labels"] = dict(self.labels)
        return d


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else str(v)


@dataclass(frozen=True)
class BinarizationSpec:
    rules: dict[str, ColumnRule] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "BinarizationSpec":
        rules = {}
        for name, r in d.items():
            labels = tuple((str(k), str(v)) for k, v in r.get("labels", {}).items())
            rules[name] = ColumnRule(
                r["rule"],
                tuple(str(c) for c in r.get("categories", ())),
                tuple(float(c) for c in r.get("cuts", ())),
                labels,
            )
        return cls(rules)

    @classmethod
    def load(cls, path) -> "BinarizationSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def passthrough(cls, columns) -> "BinarizationSpec":
        return cls({c: ColumnRule("pass") for c in columns})

    def to_dict(self) -> dict:
        return {name: r.to_dict() for name, r in self.rules.items()}

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def output_names(self) -> list[str]:
        return [n for name, r in self.rules.items() for n in r.output_names(name)]

    def predictor_columns(self) -> dict[str, list[int]]:
        """Predictor name -> indices of its encoded columns."""
        out, start = {}, 0
        for name, r in self.rules.items():
            width = len(r.output_names(name))
            out[name] = list(range(start, start + width))
            start += width
        return out


@dataclass(frozen=True)
class IngestResult:
    dataset: BinaryDataset
    dropped: int
    spec: BinarizationSpec


def _read_records(path) -> tuple[list[str], list[dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: header row required")
        header = [h.strip() for h in reader.fieldnames]
        reader.fieldnames = header
        return header, list(reader)


def _missing(cell) -> bool:
    return (cell or "").strip().lower() in MISSING


def _encode(spec: BinarizationSpec, records: list[dict]) -> np.ndarray:
    blocks = [rule.encode(name, [r[name].strip() for r in records]) for name, rule in spec.rules.items()]
    if not blocks:
        raise DataError("P ≥ 1 required")
    return np.hstack(blocks)


def ingest_csv(path, label_col: str, spec: BinarizationSpec | None = None) -> IngestResult:
    """Read a CSV with a header row and encode it per ``spec``.

    Without a spec every non-label column is passed through. Rows with a
    missing value in the label or any used column are dropped and counted.
    """
    header, records = _read_records(path)
    if label_col not in header:
        raise DataError(f"unknown column {label_col!r}")
    if spec is None:
        spec = BinarizationSpec.passthrough([h for h in header if h != label_col])
    for name in spec.rules:
        if name not in header:
            raise DataError(f"unknown column {name!r}")
    used = [label_col, *spec.rules]
    kept = [r for r in records if not any(_missing(r[c]) for c in used)]
    dropped = len(records) - len(kept)
    if dropped:
        log.info("dropped %d rows with missing values", dropped)
    if not kept:
        raise DataError("N ≥ 1 required")
    labels = np.array([_label(r[label_col]) for r in kept])
    dataset = validate_dataset(_encode(spec, kept), labels, spec.output_names())
    return IngestResult(dataset, dropped, spec)


def _label(cell: str) -> int:
    try:
        v = float(cell)
    except ValueError:
        return -1
    return int(v) if v in (0.0, 1.0) else -1


def encode_features(path, spec: BinarizationSpec) -> np.ndarray:
    """Feature matrix for unlabeled rows; a missing cell is an error here."""
    header, records = _read_records(path)
    for name in spec.rules:
        if name not in header:
            raise DataError(f"unknown column {name!r}")
    for j, r in enumerate(records):
        for c in spec.rules:
            if _missing(r[c]):
                raise DataError(f"missing value at row {j}, column {c!r}")
    if not records:
        raise DataError("N ≥ 1 required")
    return _encode(spec, records)


def read_columns(path, columns: list[str]) -> dict[str, np.ndarray]:
    """Numeric columns from a headered CSV."""
    header, rows = _read_records(path)
    out = {}
    for c in columns:
        if c not in header:
            raise DataError(f"unknown column {c!r}")
        try:
            out[c] = np.array([float(r[c]) for r in rows])
        except ValueError as exc:
            raise DataError(f"non-numeric cell in column {c!r}: {exc}") from None
    return out


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v
