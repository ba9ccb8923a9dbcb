"""Asset condition records, feature schemas and CSV ingestion.

A dataset is either *one-time* (one inspection row per asset) or *long-term*
(several inspection years per asset).  CSV layout::

    AssetID,[InspectionYear],<feature 1>,...,<feature n>,Age,Status

Schemas live in a separate JSON file, see :func:`load_schema`.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateKey,
    EmptyDataset,
    InvalidStatus,
    MalformedNumeric,
    MissingColumn,
    NegativeAge,
    SchemaError,
    UnknownLevel,
)

NUMERIC = "numeric"
ORDERED = "ordered-categorical"
UNORDERED = "unordered-categorical"
FEATURE_KINDS = (NUMERIC, ORDERED, UNORDERED)

ONE_TIME = "one-time"
LONG_TERM = "long-term"
DATASET_KINDS = (ONE_TIME, LONG_TERM)

ID_COLUMN = "AssetID"
YEAR_COLUMN = "InspectionYear"
AGE_COLUMN = "Age"
STATUS_COLUMN = "Status"


class Status(str, Enum):
    WORKING = "Working"
    FAILED = "Failed"

    @classmethod
    def parse(cls, text) -> "Status":
        if isinstance(text, Status):
            return text
        key = str(text).strip().lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(text)

    @property
    def failed(self) -> bool:
        return self is Status.FAILED

    def flipped(self) -> "Status":
        return Status.WORKING if self is Status.FAILED else Status.FAILED


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str = NUMERIC
    levels: tuple = ()
    weight: float = 1.0

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        object.__setattr__(self, "levels", tuple(str(v) for v in self.levels))
        if self.is_categorical:
            if not self.levels:
                raise SchemaError(f"categorical feature {self.name!r} needs levels")
            if len(set(self.levels)) != len(self.levels) or any(v == "" for v in self.levels):
                raise SchemaError(f"feature {self.name!r}: levels must be unique and non-empty")
        elif self.levels:
            raise SchemaError(f"numeric feature {self.name!r} cannot declare levels")
        w = float(self.weight)
        if not (math.isfinite(w) and w > 0):
            raise SchemaError(f"feature {self.name!r}: weight must be positive, got {self.weight!r}")
        object.__setattr__(self, "weight", w)

    @property
    def is_categorical(self) -> bool:
        return self.kind != NUMERIC

    def level_index(self, value) -> int:
        """1-based position of ``value`` in the level list."""
        try:
            return self.levels.index(str(value).strip()) + 1
        except ValueError:
            raise UnknownLevel(self.name, value) from None


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple

    def __post_init__(self):
        feats = tuple(f if isinstance(f, FeatureSpec) else FeatureSpec(**f) for f in self.features)
        names = [f.name for f in feats]
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        reserved = {ID_COLUMN, YEAR_COLUMN, AGE_COLUMN, STATUS_COLUMN} & set(names)
        if reserved:
            raise SchemaError(f"feature names clash with fixed columns: {sorted(reserved)}")
        object.__setattr__(self, "features", feats)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def numeric_features(self) -> list[FeatureSpec]:
        """Features that live in the numeric part of the encoding (numeric + ordered)."""
        return [f for f in self.features if f.kind != UNORDERED]

    @property
    def categorical_features(self) -> list[FeatureSpec]:
        return [f for f in self.features if f.kind == UNORDERED]

    def __getitem__(self, name) -> FeatureSpec:
        for f in self.features:
            if f.name == name:
                return f
        raise KeyError(name)

    def to_dict(self) -> dict:
        out = []
        for f in self.features:
            d = {"name": f.name, "kind": f.kind}
            if f.levels:
                d["levels"] = list(f.levels)
            d["weight"] = f.weight
            out.append(d)
        return {"features": out}

    @classmethod
    def from_dict(cls, data: Mapping) -> "FeatureSchema":
        try:
            items = data["features"]
        except (KeyError, TypeError):
            raise SchemaError("schema must be an object with a 'features' array") from None
        specs = []
        for item in items:
            if "name" not in item:
                raise SchemaError(f"feature entry without a name: {item!r}")
            specs.append(FeatureSpec(name=str(item["name"]), kind=item.get("kind", NUMERIC),
                                     levels=tuple(item.get("levels", ())),
                                     weight=item.get("weight", 1.0)))
        return cls(tuple(specs))


def load_schema(path) -> FeatureSchema:
    """Read a JSON schema file.

    Example::

        {"features": [
            {"name": "PD", "kind": "numeric", "weight": 2.0},
            {"name": "Visual", "kind": "ordered-categorical",
             "levels": ["Good", "Medium", "Poor"]}
        ]}

    ``levels`` of an ordered feature are listed from least to most severe.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: {exc}") from None
    return FeatureSchema.from_dict(data)


def save_schema(schema: FeatureSchema, path) -> None:
    Path(path).write_text(json.dumps(schema.to_dict(), indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class AssetRecord:
    asset_id: str
    values: Mapping
    physical_age: float
    status: Status
    inspection_year: int | None = None

    @property
    def failed(self) -> bool:
        return self.status is Status.FAILED


def check_record(record: AssetRecord, schema: FeatureSchema, row=None) -> AssetRecord:
    """Validate ``record`` against ``schema``; return a copy with coerced values."""
    if set(record.values) != set(schema.names):
        missing = set(schema.names) - set(record.values)
        if missing:
            raise MissingColumn(sorted(missing)[0])
        raise SchemaError(f"unexpected features {sorted(set(record.values) - set(schema.names))}")
    values = {}
    for spec in schema.features:
        raw = record.values[spec.name]
        if spec.is_categorical:
            value = str(raw).strip()
            if value not in spec.levels:
                raise UnknownLevel(spec.name, raw, row)
        else:
            try:
                value = float(raw)
            except (TypeError, ValueError):
                raise MalformedNumeric(row, spec.name, raw) from None
            if not math.isfinite(value):
                raise MalformedNumeric(row, spec.name, raw)
        values[spec.name] = value
    try:
        age = float(record.physical_age)
    except (TypeError, ValueError):
        raise MalformedNumeric(row, AGE_COLUMN, record.physical_age) from None
    if not math.isfinite(age) or age < 0:
        raise NegativeAge(row, record.physical_age)
    try:
        status = Status.parse(record.status)
    except ValueError:
        raise InvalidStatus(row, record.status) from None
    year = None if record.inspection_year is None else int(record.inspection_year)
    return AssetRecord(str(record.asset_id), values, age, status, year)


@dataclass(frozen=True)
class Dataset:
    schema: FeatureSchema
    records: tuple
    kind: str = ONE_TIME

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise SchemaError(f"unknown dataset kind {self.kind!r}")
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for rec in self.records:
            if self.kind == LONG_TERM:
                if rec.inspection_year is None:
                    raise MissingColumn(YEAR_COLUMN)
                key = (rec.asset_id, rec.inspection_year)
            else:
                key = rec.asset_id
            if key in seen:
                raise DuplicateKey(*key) if isinstance(key, tuple) else DuplicateKey(key)
            seen.add(key)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def ages(self) -> np.ndarray:
        return np.array([r.physical_age for r in self.records], dtype=float)

    @property
    def failed(self) -> np.ndarray:
        return np.array([r.failed for r in self.records], dtype=bool)

    @property
    def asset_ids(self) -> list[str]:
        """Distinct asset ids in order of first appearance."""
        return list(dict.fromkeys(r.asset_id for r in self.records))

    def histories(self) -> dict[str, list[AssetRecord]]:
        """Records grouped per asset, each list sorted by inspection year."""
        groups: dict[str, list[AssetRecord]] = {}
        for rec in self.records:
            groups.setdefault(rec.asset_id, []).append(rec)
        if self.kind == LONG_TERM:
            for recs in groups.values():
                recs.sort(key=lambda r: r.inspection_year)
        return groups

    def latest(self) -> "Dataset":
        """One-time view holding each asset's most recent record."""
        rows = [recs[-1] for recs in self.histories().values()]
        return Dataset(self.schema, rows, ONE_TIME)

    def subset(self, asset_ids: Iterable[str]) -> "Dataset":
        keep = set(asset_ids)
        return Dataset(self.schema, [r for r in self.records if r.asset_id in keep], self.kind)

    def replace_records(self, records) -> "Dataset":
        return Dataset(self.schema, records, self.kind)


def _fixed_columns(kind):
    return [ID_COLUMN, YEAR_COLUMN] if kind == LONG_TERM else [ID_COLUMN]


def detect_kind(path) -> str:
    """Guess the dataset kind from the CSV header."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        header = next(csv.reader(fh), [])
    return LONG_TERM if YEAR_COLUMN in [h.strip() for h in header] else ONE_TIME


def load_dataset(path, schema: FeatureSchema, kind: str = ONE_TIME,
                 drop_outliers: bool = False) -> Dataset:
    """Load and validate a dataset CSV.  Row order is preserved.

    With ``drop_outliers`` the records flagged by :func:`outlier_rows` are
    excluded (and reported through :mod:`warnings`).
    """
    if kind not in DATASET_KINDS:
        raise SchemaError(f"unknown dataset kind {kind!r}")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh, skipinitialspace=True)
        header = [h.strip() for h in (reader.fieldnames or [])]
        reader.fieldnames = header
        for col in _fixed_columns(kind) + schema.names + [AGE_COLUMN, STATUS_COLUMN]:
            if col not in header:
                raise MissingColumn(col)
        records = []
        for i, row in enumerate(reader, start=1):
            if not any((v or "").strip() for v in row.values() if isinstance(v, str)):
                continue
            year = None
            if kind == LONG_TERM:
                text = (row[YEAR_COLUMN] or "").strip()
                try:
                    year = int(float(text))
                except ValueError:
                    raise MalformedNumeric(i, YEAR_COLUMN, text) from None
            raw = AssetRecord(
                asset_id=(row[ID_COLUMN] or "").strip(),
                values={name: (row[name] or "").strip() for name in schema.names},
                physical_age=(row[AGE_COLUMN] or "").strip(),
                status=(row[STATUS_COLUMN] or "").strip(),
                inspection_year=year,
            )
            records.append(check_record(raw, schema, row=i))
    dataset = Dataset(schema, records, kind)
    if drop_outliers:
        bad = outlier_rows(dataset)
        if bad:
            warnings.warn(f"dropping {len(bad)} outlier record(s)", stacklevel=2)
            dataset = dataset.replace_records(
                [r for i, r in enumerate(dataset.records) if i not in bad])
    return dataset


def format_number(x: float) -> str:
    """Shortest text that round-trips ``x``; integral values drop the '.0'."""
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def save_dataset(dataset: Dataset, path) -> None:
    columns = _fixed_columns(dataset.kind) + dataset.schema.names + [AGE_COLUMN, STATUS_COLUMN]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for rec in dataset.records:
            row = [rec.asset_id]
            if dataset.kind == LONG_TERM:
                row.append(str(rec.inspection_year))
            for spec in dataset.schema.features:
                v = rec.values[spec.name]
                row.append(v if spec.is_categorical else format_number(v))
            row += [format_number(rec.physical_age), rec.status.value]
            writer.writerow(row)


@dataclass(frozen=True)
class DataWarning:
    kind: str            # "outlier" | "constant"
    feature: str
    row: int | None = None
    value: float | None = None
    message: str = field(default="", compare=False)

    def __str__(self):
        return self.message


def _fences(values: np.ndarray, k: float = 3.0):
    q1, q3 = np.percentile(values, [25, 75])
    iqr = q3 - q1
    return q1 - k * iqr, q3 + k * iqr


def validate_dataset(dataset: Dataset) -> list[DataWarning]:
    """Statistical sanity checks; never raises.

    Flags numeric values outside ``[Q1 - 3 IQR, Q3 + 3 IQR]`` of their feature
    and features that take a single value across the whole dataset.
    """
    out: list[DataWarning] = []
    if not dataset.records:
        return out
    for spec in dataset.schema.features:
        col = [r.values[spec.name] for r in dataset.records]
        if len(set(col)) == 1 and len(col) > 1:
            out.append(DataWarning("constant", spec.name,
                                   message=f"feature {spec.name!r} is constant ({col[0]!r})"))
            continue
        if spec.is_categorical:
            continue
        arr = np.asarray(col, dtype=float)
        lo, hi = _fences(arr)
        for i in np.flatnonzero((arr < lo) | (arr > hi)):
            out.append(DataWarning(
                "outlier", spec.name, int(i), float(arr[i]),
                message=f"record {int(i)} ({dataset.records[i].asset_id}): {spec.name}="
                        f"{arr[i]:g} outside [{lo:g}, {hi:g}]"))
    return out


def outlier_rows(dataset: Dataset) -> set[int]:
    return {w.row for w in validate_dataset(dataset) if w.kind == "outlier"}


def make_dataset(schema: FeatureSchema, rows: Sequence[Mapping], kind: str = ONE_TIME) -> Dataset:
    """Build a validated dataset from plain dicts (handy in scripts and tests).

    Each row needs ``asset_id``, ``values``, ``physical_age``, ``status`` and,
    for long-term data, ``inspection_year``.
    """
    records = [check_record(AssetRecord(**row), schema, row=i) for i, row in enumerate(rows, 1)]
    return Dataset(schema, records, kind)


def require_nonempty(dataset: Dataset) -> None:
    if not dataset.records:
        raise EmptyDataset("dataset has no records")
