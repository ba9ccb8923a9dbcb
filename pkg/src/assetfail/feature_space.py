"""Encoding of mixed condition features and the weighted mixed distance.

Numeric features and ordered categorical features form the *numeric part*
of an encoded point; ordered levels are first mapped to ``(c - 1/2) / N`` and
then min-max normalised like any other numeric column.  Unordered categorical
features form the *categorical part* and are stored as 0-based level indices.

The distance is the weighted sum of squares over the numeric part plus a
weighted mismatch count over the categorical part.  No square root is taken
anywhere; every consumer (k-means, silhouette, conditional ages, similar-asset
search) uses this squared form.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .asset_data import ORDERED, Dataset, FeatureSchema
from .errors import EmptyDataset, OutOfRange, SchemaMismatch


def encode_ordered(c: int, n_levels: int) -> float:
    """Map the 1-based level ``c`` of ``n_levels`` ordered levels into (0, 1)."""
    if n_levels < 1 or not 1 <= c <= n_levels:
        raise OutOfRange(f"level index {c} outside [1, {n_levels}]")
    return (c - 0.5) / n_levels


@dataclass(frozen=True)
class NormalizationParams:
    names: tuple
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=float)
        maxs = np.asarray(self.maxs, dtype=float)
        if mins.shape != maxs.shape or mins.shape != (len(self.names),):
            raise ValueError("names, mins and maxs must align")
        if np.any(mins > maxs):
            raise ValueError("min must not exceed max")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    def to_dict(self):
        return {"names": list(self.names), "min": self.mins.tolist(), "max": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["names"]), d["min"], d["max"])


def normalize(x_raw, lo: float, hi: float):
    """Min-max normalise, clamping values from outside the fitted range.

    A degenerate range (``lo == hi``) maps everything to 0.
    """
    x = np.asarray(x_raw, dtype=float)
    if hi == lo:
        out = np.zeros_like(x)
    else:
        with np.errstate(over="ignore"):
            out = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def raw_numeric_matrix(schema: FeatureSchema, records) -> np.ndarray:
    """Numeric part before normalisation: (n, p) with ordered levels mapped."""
    feats = schema.numeric_features
    out = np.empty((len(records), len(feats)), dtype=float)
    for j, spec in enumerate(feats):
        if spec.kind == ORDERED:
            n = len(spec.levels)
            out[:, j] = [encode_ordered(spec.level_index(r.values[spec.name]), n) for r in records]
        else:
            out[:, j] = [r.values[spec.name] for r in records]
    return out


def categorical_matrix(schema: FeatureSchema, records) -> np.ndarray:
    feats = schema.categorical_features
    out = np.empty((len(records), len(feats)), dtype=np.int64)
    for j, spec in enumerate(feats):
        out[:, j] = [spec.level_index(r.values[spec.name]) - 1 for r in records]
    return out


def fit_normalization(dataset: Dataset) -> NormalizationParams:
    if not dataset.records:
        raise EmptyDataset("cannot fit normalisation on an empty dataset")
    raw = raw_numeric_matrix(dataset.schema, dataset.records)
    names = tuple(f.name for f in dataset.schema.numeric_features)
    return NormalizationParams(names, raw.min(axis=0), raw.max(axis=0))


@dataclass(frozen=True)
class EncodedPoint:
    numeric: np.ndarray
    categorical: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "numeric", np.asarray(self.numeric, dtype=float).reshape(-1))
        object.__setattr__(self, "categorical",
                           np.asarray(self.categorical, dtype=np.int64).reshape(-1))


@dataclass(frozen=True)
class EncodedSet:
    """A batch of encoded points stored column-wise: (n, p) floats and (n, q) ints."""
    numeric: np.ndarray
    categorical: np.ndarray

    def __post_init__(self):
        num = np.asarray(self.numeric, dtype=float)
        cat = np.asarray(self.categorical, dtype=np.int64)
        if num.ndim == 1:
            num = num.reshape(-1, 1)
        if cat.size == 0:
            cat = np.zeros((len(num), 0), dtype=np.int64)
        elif cat.ndim == 1:
            cat = cat.reshape(len(num), -1)
        if cat.shape[0] != num.shape[0]:
            raise SchemaMismatch("numeric and categorical parts differ in length")
        object.__setattr__(self, "numeric", num)
        object.__setattr__(self, "categorical", cat)

    @classmethod
    def from_points(cls, points: Sequence[EncodedPoint]) -> "EncodedSet":
        if isinstance(points, EncodedSet):
            return points
        pts = list(points)
        if not pts:
            raise EmptyDataset("no points")
        p, q = len(pts[0].numeric), len(pts[0].categorical)
        num = np.array([pt.numeric for pt in pts], dtype=float).reshape(len(pts), p)
        cat = np.array([pt.categorical for pt in pts], dtype=np.int64).reshape(len(pts), q)
        return cls(num, cat)

    def __len__(self):
        return self.numeric.shape[0]

    def __getitem__(self, i) -> EncodedPoint:
        return EncodedPoint(self.numeric[i], self.categorical[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def take(self, idx) -> "EncodedSet":
        idx = np.asarray(idx)
        return EncodedSet(self.numeric[idx], self.categorical[idx])

    @property
    def p(self) -> int:
        return self.numeric.shape[1]

    @property
    def q(self) -> int:
        return self.categorical.shape[1]

    def distinct_count(self) -> int:
        rows = np.hstack([self.numeric, self.categorical.astype(float)])
        return len(np.unique(rows, axis=0))

    def with_numeric_column(self, column) -> "EncodedSet":
        col = np.asarray(column, dtype=float).reshape(-1, 1)
        return EncodedSet(np.hstack([self.numeric, col]), self.categorical)


@dataclass(frozen=True)
class MixedMetric:
    """Weighted mixed squared distance over encoded points."""
    numeric_weights: np.ndarray
    categorical_weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "numeric_weights",
                           np.asarray(self.numeric_weights, dtype=float).reshape(-1))
        object.__setattr__(self, "categorical_weights",
                           np.asarray(self.categorical_weights, dtype=float).reshape(-1))

    @classmethod
    def for_schema(cls, schema: FeatureSchema) -> "MixedMetric":
        return cls([f.weight for f in schema.numeric_features],
                   [f.weight for f in schema.categorical_features])

    @classmethod
    def uniform(cls, p: int, q: int = 0) -> "MixedMetric":
        return cls(np.ones(p), np.ones(q))

    def extended(self, weight: float = 1.0) -> "MixedMetric":
        """Metric with one extra numeric slot appended (used for physical age)."""
        return MixedMetric(np.append(self.numeric_weights, weight), self.categorical_weights)

    def _check(self, p, q):
        if p != len(self.numeric_weights) or q != len(self.categorical_weights):
            raise SchemaMismatch(f"point has shape (p={p}, q={q}), metric expects "
                                 f"(p={len(self.numeric_weights)}, q={len(self.categorical_weights)})")

    def distance(self, x: EncodedPoint, y: EncodedPoint) -> float:
        if x.numeric.shape != y.numeric.shape or x.categorical.shape != y.categorical.shape:
            raise SchemaMismatch("points come from different schemas")
        self._check(len(x.numeric), len(x.categorical))
        diff = x.numeric - y.numeric
        num = float(np.dot(self.numeric_weights, diff * diff))
        cat = float(np.dot(self.categorical_weights, x.categorical != y.categorical))
        return num + cat

    def cross(self, a: EncodedSet, b: EncodedSet) -> np.ndarray:
        """Distance matrix of shape (len(a), len(b))."""
        if a.p != b.p or a.q != b.q:
            raise SchemaMismatch("point sets come from different schemas")
        self._check(a.p, a.q)
        out = np.zeros((len(a), len(b)))
        for j, w in enumerate(self.numeric_weights):
            d = a.numeric[:, j, None] - b.numeric[None, :, j]
            out += w * (d * d)
        for j, w in enumerate(self.categorical_weights):
            out += w * (a.categorical[:, j, None] != b.categorical[None, :, j])
        return out

    def pairwise(self, a: EncodedSet) -> np.ndarray:
        return self.cross(a, a)

    def to_points(self, a: EncodedSet, point: EncodedPoint) -> np.ndarray:
        return self.cross(a, EncodedSet(point.numeric[None, :], point.categorical[None, :]))[:, 0]


class Encoder:
    """Schema plus fitted normalisation: turns records into encoded points.

    ``clamped`` counts numeric values that fell outside the fitted range (and
    were clamped) across all calls to :meth:`encode`.
    """

    def __init__(self, schema: FeatureSchema, params: NormalizationParams):
        names = tuple(f.name for f in schema.numeric_features)
        if names != tuple(params.names):
            raise SchemaMismatch("normalisation parameters do not match the schema")
        self.schema = schema
        self.params = params
        self.metric = MixedMetric.for_schema(schema)
        self.clamped = 0

    @classmethod
    def fit(cls, dataset: Dataset) -> "Encoder":
        return cls(dataset.schema, fit_normalization(dataset))

    def encode(self, records) -> EncodedSet:
        records = list(records.records if isinstance(records, Dataset) else records)
        raw = raw_numeric_matrix(self.schema, records)
        lo, hi = self.params.mins, self.params.maxs
        self.clamped += int(np.sum((raw < lo) | (raw > hi)))
        span = hi - lo
        safe = np.where(span > 0, span, 1.0)
        num = np.where(span > 0, np.clip((raw - lo) / safe, 0.0, 1.0), 0.0)
        return EncodedSet(num, categorical_matrix(self.schema, records))

    def encode_one(self, record) -> EncodedPoint:
        return self.encode([record])[0]

