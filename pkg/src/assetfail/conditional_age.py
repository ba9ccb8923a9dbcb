"""Conditional ages, aging rates and future conditional-age projection.

A cluster's conditional age is the mean physical age of its members.  An
asset's conditional age is the inverse-distance weighted mean of the cluster
ages, using the (squared) mixed distance to each centroid.  The aging rate is
conditional age over physical age; it is projected forward either as a
constant (one-time data) or scaled by the drift seen on similar assets
(long-term data).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .asset_data import Dataset
from .clustering import ClusterModel
from .errors import (
    EmptySimilars,
    InsufficientHistory,
    ZeroBaseRate,
    ZeroObservedInterval,
    ZeroPhysicalAge,
)
from .feature_space import EncodedPoint, EncodedSet, MixedMetric, NormalizationParams, normalize

NEAR_CENTROID_EPS = 1e-12


@dataclass(frozen=True)
class AgedClusterModel:
    base: ClusterModel
    conditional_ages: np.ndarray
    normalization: NormalizationParams | None = None

    @property
    def centroids(self) -> EncodedSet:
        return self.base.centroids

    def table(self):
        """Rows of (cluster id, members, conditional age), ids starting at 1."""
        return [(j + 1, int(n), float(a)) for j, (n, a)
                in enumerate(zip(self.base.member_counts, self.conditional_ages))]


def compute_cluster_ages(model: ClusterModel, records, normalization=None) -> AgedClusterModel:
    """Mean physical age of every cluster's members, failed records included.

    ``records`` is the clustered :class:`Dataset` or a plain sequence of ages,
    aligned with ``model.labels``.
    """
    ages = records.ages if isinstance(records, Dataset) else np.asarray(records, dtype=float)
    labels = np.asarray(model.labels)
    if len(ages) != len(labels):
        raise ValueError("ages and cluster assignment differ in length")
    counts = np.bincount(labels, minlength=model.k)
    sums = np.bincount(labels, weights=ages, minlength=model.k)
    return AgedClusterModel(model, sums / counts, normalization)


def conditional_ages(points: EncodedSet, aged: AgedClusterModel, metric: MixedMetric) -> np.ndarray:
    """Vectorised asset conditional ages for a batch of encoded points."""
    points = EncodedSet.from_points(points)
    d = metric.cross(points, aged.centroids)
    ages = np.asarray(aged.conditional_ages, dtype=float)
    out = np.empty(len(points))
    near = d.min(axis=1) < NEAR_CENTROID_EPS
    out[near] = ages[np.argmin(d[near], axis=1)]
    if np.any(~near):
        inv = 1.0 / d[~near]
        out[~near] = (inv @ ages) / inv.sum(axis=1)
    return out


def asset_conditional_age(x: EncodedPoint, aged: AgedClusterModel, metric: MixedMetric) -> float:
    return float(conditional_ages(EncodedSet(x.numeric[None, :], x.categorical[None, :]),
                                  aged, metric)[0])


def aging_rate(conditional_age: float, physical_age: float) -> float:
    if physical_age <= 0:
        raise ZeroPhysicalAge("aging rate needs a positive physical age")
    return conditional_age / physical_age


@dataclass(frozen=True)
class AgingProfile:
    physical_age: float
    conditional_age: float

    @property
    def rate(self) -> float:
        return aging_rate(self.conditional_age, self.physical_age)


def project_one_time(rate: float, physical_age: float, horizon: float) -> float:
    """Future conditional age assuming the aging rate stays constant."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    return rate * (physical_age + horizon)


def project_rate_long_term(rate: float, similars: Sequence) -> float:
    """Scale ``rate`` by the mean drift ratio ``R_i^T / R_i`` of similar assets.

    ``similars`` holds ``(R_i, R_i^T)`` pairs.
    """
    pairs = [(float(r0), float(r1)) for r0, r1 in similars]
    if not pairs:
        raise EmptySimilars("no similar assets supplied")
    if any(r0 <= 0 for r0, _ in pairs):
        raise ZeroBaseRate("similar asset with non-positive base aging rate")
    return rate * float(np.mean([r1 / r0 for r0, r1 in pairs]))


def project_long_term(future_rate: float, physical_age: float, horizon: float) -> float:
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    return future_rate * (physical_age + horizon)


def interpolate_rate(r_start: float, r_end: float, observed: float, desired: float) -> float:
    """Linear interpolation of an aging rate observed over ``observed`` years
    to a ``desired`` interval; extrapolates (with a warning) past the end."""
    if observed <= 0:
        raise ZeroObservedInterval("observed interval must be positive")
    if desired < 0:
        raise ValueError("desired interval must be >= 0")
    if desired > observed:
        warnings.warn(f"extrapolating aging rate from {observed:g} to {desired:g} years",
                      RuntimeWarning, stacklevel=2)
    return r_start + (r_end - r_start) * desired / observed


@dataclass(frozen=True)
class HistoricalAsset:
    asset_id: str
    start_age: float
    end_age: float
    start_rate: float
    end_rate: float
    span: float

    def rates_for(self, horizon: float) -> tuple[float, float]:
        """(R_i, R_i^T) with R_i^T re-expressed for ``horizon`` years."""
        if np.isclose(self.span, horizon):
            return self.start_rate, self.end_rate
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return self.start_rate, interpolate_rate(self.start_rate, self.end_rate,
                                                     self.span, horizon)


@dataclass(frozen=True)
class SimilarAsset:
    asset: HistoricalAsset
    distance: float


class HistoryIndex:
    """Candidate pool for the similar-asset search.

    Built from a long-term dataset with :meth:`from_history`: each asset with
    at least two inspection years contributes its earliest record (encoded,
    plus min-max normalised physical age) and its aging rates at the earliest
    and latest inspection.  Assets with zero physical age or zero conditional
    age at the earliest inspection cannot provide a drift ratio and are left
    out.
    """

    def __init__(self, assets: Sequence[HistoricalAsset], points: EncodedSet | None,
                 age_min: float, age_max: float, metric: MixedMetric):
        if points is not None and len(points) != len(assets):
            raise ValueError("one encoded point per historical asset expected")
        self.assets = list(assets)
        self.points = points if self.assets else None
        self.age_min = float(age_min)
        self.age_max = float(age_max)
        self.metric = metric

    @classmethod
    def from_history(cls, history: Dataset, encoder, aged: AgedClusterModel,
                     age_weight: float = 1.0) -> "HistoryIndex":
        groups = [recs for recs in history.histories().values() if len(recs) >= 2]
        ages = history.ages
        age_min = float(ages.min()) if len(ages) else 0.0
        age_max = float(ages.max()) if len(ages) else 0.0
        assets, points = [], None
        if groups:
            firsts = [g[0] for g in groups]
            lasts = [g[-1] for g in groups]
            enc_first = encoder.encode(firsts)
            ac_first = conditional_ages(enc_first, aged, encoder.metric)
            ac_last = conditional_ages(encoder.encode(lasts), aged, encoder.metric)
            keep = []
            for i, (f, l) in enumerate(zip(firsts, lasts)):
                if f.physical_age <= 0 or l.physical_age <= 0 or ac_first[i] <= 0:
                    continue
                span = float(l.inspection_year - f.inspection_year)
                if span <= 0:
                    span = l.physical_age - f.physical_age
                if span <= 0:
                    continue
                keep.append(i)
                assets.append(HistoricalAsset(
                    f.asset_id, f.physical_age, l.physical_age,
                    ac_first[i] / f.physical_age, ac_last[i] / l.physical_age, span))
            if keep:
                scaled = normalize([firsts[i].physical_age for i in keep], age_min, age_max)
                points = enc_first.take(keep).with_numeric_column(scaled)
        return cls(assets, points, age_min, age_max, encoder.metric.extended(age_weight))

    def scale_age(self, age):
        return normalize(age, self.age_min, self.age_max)

    def __len__(self):
        return len(self.assets)


def find_similar_assets(target: EncodedPoint, physical_age: float, index: HistoryIndex,
                        n: int = 5) -> list[SimilarAsset]:
    """The ``n`` historical assets closest to the target, nearest first.

    Distance covers the encoded condition features plus the normalised
    physical age, evaluated against each candidate's earliest inspection.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(index) < n:
        raise InsufficientHistory(f"need {n} qualifying historical assets, found {len(index)}")
    x = EncodedPoint(np.append(target.numeric, index.scale_age(physical_age)), target.categorical)
    d = index.metric.to_points(index.points, x)
    order = np.argsort(d, kind="stable")[:n]
    return [SimilarAsset(index.assets[i], float(d[i])) for i in order]
