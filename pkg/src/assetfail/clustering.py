"""K-means over mixed encoded points, silhouette scores and choice of K.

Centroids carry a numeric part (member mean) and a categorical part (member
mode, ties to the lowest level index).  Distances are the squared mixed form
from :mod:`assetfail.feature_space`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import SingleCluster, TooFewPoints
from .feature_space import EncodedSet, MixedMetric


@dataclass(frozen=True)
class KMeansConfig:
    seed: int
    restarts: int = 10
    max_iters: int = 300
    tolerance: float = 1e-9

    def to_dict(self):
        return {"seed": self.seed, "restarts": self.restarts,
                "max_iters": self.max_iters, "tolerance": self.tolerance}


@dataclass(frozen=True)
class ClusterModel:
    k: int
    centroids: EncodedSet
    labels: np.ndarray
    inertia: float
    member_counts: np.ndarray
    n_iter: int = 0
    history: tuple = field(default=(), compare=False)

    def to_dict(self):
        return {
            "k": self.k,
            "centroids": {"numeric": self.centroids.numeric.tolist(),
                          "categorical": self.centroids.categorical.tolist()},
            "member_counts": self.member_counts.tolist(),
            "inertia": self.inertia,
        }


def _update(points: EncodedSet, labels, k, n_levels):
    num = np.empty((k, points.p))
    cat = np.empty((k, points.q), dtype=np.int64)
    for c in range(k):
        members = labels == c
        num[c] = points.numeric[members].mean(axis=0)
        for j in range(points.q):
            counts = np.bincount(points.categorical[members, j], minlength=n_levels[j])
            cat[c, j] = int(np.argmax(counts))
    return EncodedSet(num, cat)


def _fix_empty(points, labels, dist, centroids, k):
    """Reseed empty clusters to the point farthest from its own centroid."""
    counts = np.bincount(labels, minlength=k)
    if counts.min() > 0:
        return labels, centroids
    labels = labels.copy()
    num, cat = centroids.numeric.copy(), centroids.categorical.copy()
    own = dist[np.arange(len(labels)), labels]
    for c in np.flatnonzero(counts == 0):
        movable = counts[labels] > 1
        cand = np.where(movable, own, -np.inf)
        i = int(np.argmax(cand))
        counts[labels[i]] -= 1
        counts[c] += 1
        labels[i] = c
        own[i] = 0.0
        num[c] = points.numeric[i]
        cat[c] = points.categorical[i]
    return labels, EncodedSet(num, cat)


def _inertia(points, labels, centroids, metric):
    return float(np.sum(metric.cross(points, centroids)[np.arange(len(labels)), labels]))


def _seed_centroids(points: EncodedSet, k, metric, rng):
    """Greedy spreading: each new seed drawn with probability proportional to
    its distance to the closest seed chosen so far."""
    n = len(points)
    chosen = [int(rng.integers(n))]
    closest = metric.to_points(points, points[chosen[0]])
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            raise TooFewPoints("not enough distinct points to seed centroids")
        i = int(rng.choice(n, p=closest / total))
        chosen.append(i)
        closest = np.minimum(closest, metric.to_points(points, points[i]))
    return points.take(chosen)


def _lloyd(points, k, metric, rng, max_iters, tolerance, n_levels):
    centroids = _seed_centroids(points, k, metric, rng)
    dist = metric.cross(points, centroids)
    labels = np.argmin(dist, axis=1)
    labels, centroids = _fix_empty(points, labels, dist, centroids, k)
    history = []
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        new = _update(points, labels, k, n_levels)
        shift = float(np.max(np.abs(new.numeric - centroids.numeric))) if points.p else 0.0
        cat_same = np.array_equal(new.categorical, centroids.categorical)
        centroids = new
        dist = metric.cross(points, centroids)
        new_labels = np.argmin(dist, axis=1)
        new_labels, centroids = _fix_empty(points, new_labels, dist, centroids, k)
        history.append(_inertia(points, new_labels, centroids, metric))
        stable = np.array_equal(new_labels, labels)
        labels = new_labels
        if stable and shift < tolerance and cat_same:
            break
    centroids = _update(points, labels, k, n_levels)
    inertia = _inertia(points, labels, centroids, metric)
    history.append(inertia)
    return labels, centroids, inertia, n_iter, tuple(history)


def kmeans(points: EncodedSet, k: int, metric: MixedMetric, config: KMeansConfig) -> ClusterModel:
    """Best-of-``config.restarts`` Lloyd iterations.

    Every restart gets its own child seed, so the result does not depend on
    the order in which restarts are evaluated.
    """
    points = EncodedSet.from_points(points)
    n = len(points)
    if k < 1:
        raise TooFewPoints("K must be at least 1")
    if n == 0 or k > points.distinct_count():
        raise TooFewPoints(f"K={k} exceeds the number of distinct points")
    n_levels = [int(points.categorical[:, j].max()) + 1 for j in range(points.q)]
    best = None
    children = np.random.SeedSequence(config.seed).spawn(config.restarts)
    for child in children:
        rng = np.random.default_rng(child)
        run = _lloyd(points, k, metric, rng, config.max_iters, config.tolerance, n_levels)
        if best is None or run[2] < best[2]:
            best = run
    labels, centroids, inertia, n_iter, history = best
    return ClusterModel(k, centroids, labels, inertia,
                        np.bincount(labels, minlength=k), n_iter, history)


def assign(points: EncodedSet, centroids: EncodedSet, metric: MixedMetric) -> np.ndarray:
    return np.argmin(metric.cross(points, centroids), axis=1)


@dataclass(frozen=True)
class SilhouetteReport:
    per_point: np.ndarray
    a: np.ndarray
    b: np.ndarray
    average: float


def silhouette(points: EncodedSet, model: ClusterModel, metric: MixedMetric,
               distances: np.ndarray | None = None) -> SilhouetteReport:
    """Per-point silhouette values and their mean.

    Points in singleton clusters score 0, as do points with a = b = 0.
    ``distances`` may carry a precomputed pairwise matrix.
    """
    if model.k < 2:
        raise SingleCluster("silhouette needs at least two clusters")
    points = EncodedSet.from_points(points)
    labels = np.asarray(model.labels)
    d = metric.pairwise(points) if distances is None else distances
    k = model.k
    counts = np.bincount(labels, minlength=k)
    onehot = np.zeros((len(labels), k))
    onehot[np.arange(len(labels)), labels] = 1.0
    sums = d @ onehot                                    # (n, k) distance sums per cluster
    own = counts[labels]
    a = np.where(own > 1, sums[np.arange(len(labels)), labels] / np.maximum(own - 1, 1), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        means = sums / counts
    means[:, counts == 0] = np.inf
    means[np.arange(len(labels)), labels] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    s = np.zeros(len(labels))
    ok = (own > 1) & (denom > 0)
    s[ok] = (b[ok] - a[ok]) / denom[ok]
    s = np.clip(s, -1.0, 1.0)
    return SilhouetteReport(s, a, b, float(s.mean()))


class KSelection(NamedTuple):
    best_k: int
    model: ClusterModel
    sweep: list


def select_k(points: EncodedSet, k_range, metric: MixedMetric, config: KMeansConfig) -> KSelection:
    """Run k-means for every K in ``k_range`` and keep the largest average
    silhouette (ties go to the smaller K).  ``sweep`` lists ``(K, S_avg)``."""
    points = EncodedSet.from_points(points)
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise TooFewPoints("empty K range")
    if ks[0] < 2:
        raise SingleCluster("K range must start at 2 or more")
    distances = metric.pairwise(points)
    sweep, best = [], None
    for k in ks:
        model = kmeans(points, k, metric, config)
        score = silhouette(points, model, metric, distances).average
        sweep.append((k, score))
        if best is None or score > best[1]:
            best = (k, score, model)
    return KSelection(best[0], best[2], sweep)
