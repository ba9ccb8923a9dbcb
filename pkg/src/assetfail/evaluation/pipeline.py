"""End-to-end learning and prediction.

Learning (on training assets): encode condition records, pick K by
silhouette, derive cluster conditional ages, compute every training asset's
conditional age, oversample failures and fit the logistic classifier.

Prediction (on test assets) follows one of four modes:

``classification``     current (A_P, A_C) against the current status
``predict-one-time``   constant aging rate projected over the horizon
``predict-long-term``  aging rate scaled by the drift of similar assets
``weibull``            physical-age-only Weibull baseline

Prediction modes are scored against the truth dataset; the horizon of each
asset is the difference between its truth age and its current age.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .. import weibull as wb
from ..asset_data import LONG_TERM, Dataset, Status
from ..classifier import (
    LabeledExample,
    LogisticModel,
    TrainConfig,
    oversample,
    predict_probability,
    train,
)
from ..clustering import KMeansConfig, select_k
from ..conditional_age import (
    AgedClusterModel,
    HistoryIndex,
    aging_rate,
    compute_cluster_ages,
    conditional_ages,
    find_similar_assets,
    project_long_term,
    project_one_time,
    project_rate_long_term,
)
from ..errors import ModeDataMismatch, SingleClass, TooFewPerClass, TooFewPoints
from ..feature_space import Encoder
from .metrics import ConfusionMatrix, MetricsReport, metrics

CLASSIFICATION = "classification"
ONE_TIME_MODE = "predict-one-time"
LONG_TERM_MODE = "predict-long-term"
WEIBULL = "weibull"
MODES = (CLASSIFICATION, ONE_TIME_MODE, LONG_TERM_MODE, WEIBULL)
MIN_PER_CLASS = 5


@dataclass(frozen=True)
class PipelineConfig:
    seed: int
    ratio: float = 0.8
    k_range: tuple = (2, 6)
    restarts: int = 10
    max_iters: int = 300
    tolerance: float = 1e-9
    n_similars: int = 5
    threshold: float = 0.5
    weibull_conditional: bool = True

    @property
    def kmeans(self) -> KMeansConfig:
        return KMeansConfig(self.seed, self.restarts, self.max_iters, self.tolerance)

    def with_seed(self, seed) -> "PipelineConfig":
        return replace(self, seed=int(seed))

    def to_dict(self):
        return {"seed": self.seed, "ratio": self.ratio, "k_range": list(self.k_range),
                "restarts": self.restarts, "max_iters": self.max_iters,
                "tolerance": self.tolerance, "n_similars": self.n_similars,
                "threshold": self.threshold, "weibull_conditional": self.weibull_conditional}


# -- splitting -------------------------------------------------------------

def train_count(n: int, ratio: float) -> int:
    """Training share of a class of ``n``: ``ratio * n`` rounded half up."""
    return int(np.floor(ratio * n + 0.5))


def stratified_split(ids, failed, ratio: float, seed, min_per_class: int = MIN_PER_CLASS):
    """Split ``ids`` by status; returns (train_ids, test_ids) in input order."""
    ids = list(ids)
    failed = np.asarray(failed, dtype=bool)
    if not 0 < ratio <= 1:
        raise ValueError("ratio must lie in (0, 1]")
    if failed.all() or not failed.any():
        raise SingleClass("every record has the same status; need Working and Failed")
    rng = np.random.default_rng(seed)
    train_idx = []
    for cls in (True, False):
        members = np.flatnonzero(failed == cls)
        name = "Failed" if cls else "Working"
        if len(members) < min_per_class:
            raise TooFewPerClass(f"need >= {min_per_class} {name} records, got {len(members)}")
        k = train_count(len(members), ratio)
        if k == 0 or k == len(members):
            raise TooFewPerClass(f"ratio {ratio} leaves an empty {name} train or test part")
        train_idx.extend(rng.permutation(members)[:k].tolist())
    in_train = np.zeros(len(ids), dtype=bool)
    in_train[train_idx] = True
    return [i for i, t in zip(ids, in_train) if t], [i for i, t in zip(ids, in_train) if not t]


def split(d: Dataset, ratio: float = 0.8, seed=0) -> tuple[Dataset, Dataset]:
    """Stratified asset-level split; long-term assets are stratified by their
    latest status and keep all their rows on one side."""
    latest = d.latest()
    train_ids, test_ids = stratified_split([r.asset_id for r in latest.records],
                                           latest.failed, ratio, seed)
    return d.subset(train_ids), d.subset(test_ids)


# -- learning --------------------------------------------------------------

@dataclass(frozen=True)
class LearnedModel:
    """End state of the learning process; everything prediction needs."""
    encoder: Encoder
    aged: AgedClusterModel
    logistic: LogisticModel
    k_sweep: tuple = ()
    silhouette: float = float("nan")

    @property
    def schema(self):
        return self.encoder.schema

    def conditional_ages(self, records) -> np.ndarray:
        return conditional_ages(self.encoder.encode(records), self.aged, self.encoder.metric)


def learn(cluster_records: Dataset, training_records, config: PipelineConfig) -> LearnedModel:
    """Run the learning process.

    ``cluster_records`` feed k-means and the cluster ages; the logistic
    classifier is trained on ``training_records`` (one row per asset).
    """
    encoder = Encoder.fit(cluster_records)
    points = encoder.encode(cluster_records)
    distinct = points.distinct_count()
    lo, hi = config.k_range
    ks = [k for k in range(lo, hi + 1) if k <= distinct]
    if not ks:
        raise TooFewPoints(f"only {distinct} distinct condition records for K >= {lo}")
    selection = select_k(points, ks, encoder.metric, config.kmeans)
    aged = compute_cluster_ages(selection.model, cluster_records, encoder.params)
    rows = list(training_records)
    ac = conditional_ages(encoder.encode(rows), aged, encoder.metric)
    examples = [LabeledExample(r.physical_age, float(a), r.status) for r, a in zip(rows, ac)]
    balanced = oversample(examples, config.seed)
    logistic = train(balanced, TrainConfig(seed=config.seed))
    best = dict(selection.sweep)[selection.best_k]
    return LearnedModel(encoder, aged, logistic, tuple(selection.sweep), best)


# -- prediction ------------------------------------------------------------

@dataclass(frozen=True)
class Prediction:
    asset_id: str
    physical_age: float
    conditional_age: float
    rate: float | None
    future_rate: float | None
    horizon: float
    future_conditional_age: float
    probability: float
    status: Status
    method: str

    @property
    def future_physical_age(self) -> float:
        return self.physical_age + self.horizon


def predict_assets(model: LearnedModel, records, horizon, method: str = ONE_TIME_MODE,
                   index: HistoryIndex | None = None, n_similars: int = 5,
                   threshold: float = 0.5) -> list[Prediction]:
    """Score current records ``horizon`` years ahead (scalar or per record)."""
    records = list(records)
    horizons = np.broadcast_to(np.asarray(horizon, dtype=float), (len(records),))
    ac_now = model.conditional_ages(records)
    points = model.encoder.encode(records)
    out = []
    for i, rec in enumerate(records):
        ap, ac, t = rec.physical_age, float(ac_now[i]), float(horizons[i])
        rate = future_rate = None
        if method == CLASSIFICATION:
            future_ac = ac
            t = 0.0
        else:
            rate = aging_rate(ac, ap)
            if method == LONG_TERM_MODE:
                if index is None:
                    raise ModeDataMismatch("long-term prediction needs a long-term history")
                similars = find_similar_assets(points[i], ap, index, n_similars)
                future_rate = project_rate_long_term(
                    rate, [s.asset.rates_for(t) for s in similars])
                future_ac = project_long_term(future_rate, ap, t)
            else:
                future_ac = project_one_time(rate, ap, t)
        p = predict_probability(model.logistic, ap + t, future_ac)
        status = Status.FAILED if p > threshold else Status.WORKING
        out.append(Prediction(rec.asset_id, ap, ac, rate, future_rate, t, float(future_ac),
                              float(p), status, method))
    return out


def predict_weibull(model: wb.WeibullModel, records, horizon, threshold=0.5,
                    conditional=True) -> list[Prediction]:
    """Weibull baseline: physical age and horizon only."""
    records = list(records)
    horizons = np.broadcast_to(np.asarray(horizon, dtype=float), (len(records),))
    out = []
    for rec, t in zip(records, horizons):
        p = wb.failure_probability(model, rec.physical_age, float(t), conditional)
        status = Status.FAILED if p > threshold else Status.WORKING
        out.append(Prediction(rec.asset_id, rec.physical_age, float("nan"), None, None,
                              float(t), float("nan"), float(p), status, WEIBULL))
    return out


# -- full runs -------------------------------------------------------------

@dataclass(frozen=True)
class PipelineResult:
    confusion: ConfusionMatrix
    metrics: MetricsReport
    mode: str
    artifacts: dict = field(default_factory=dict, compare=False)


def _align(history: Dataset, truth: Dataset | None):
    current = {r.asset_id: r for r in history.latest().records}
    if truth is None:
        return current, None
    future = {r.asset_id: r for r in truth.latest().records}
    missing = set(current) - set(future)
    if missing:
        raise ModeDataMismatch(f"{len(missing)} asset(s) have no truth record, "
                               f"e.g. {sorted(missing)[0]}")
    return current, future


def assign_split(history: Dataset, truth: Dataset | None, mode: str, config: PipelineConfig):
    """The (train_ids, test_ids) split ``run_pipeline`` would use."""
    current, future = _align(history, truth if mode != CLASSIFICATION else None)
    ids = list(current)
    if mode == CLASSIFICATION:
        failed = [current[i].failed for i in ids]
    else:
        failed = [future[i].failed for i in ids]
    return stratified_split(ids, failed, config.ratio, config.seed)


def run_pipeline(history: Dataset, truth_future: Dataset | None, mode: str,
                 config: PipelineConfig, split_ids=None) -> PipelineResult:
    """Learn on the training assets, predict the test assets, score.

    ``split_ids`` fixes the (train_ids, test_ids) split, e.g. to compare
    several modes or perturbations on identical splits.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    if mode == LONG_TERM_MODE and history.kind != LONG_TERM:
        raise ModeDataMismatch("long-term prediction needs a long-term history")
    if mode != CLASSIFICATION and truth_future is None:
        raise ModeDataMismatch(f"mode {mode} needs a truth dataset")
    current, future = _align(history, truth_future if mode != CLASSIFICATION else None)
    train_ids, test_ids = split_ids or assign_split(history, truth_future, mode, config)
    train_rows = [current[i] for i in train_ids]
    test_rows = [current[i] for i in test_ids]
    if mode == CLASSIFICATION:
        actual = [r.status for r in test_rows]
        horizon = 0.0
    else:
        actual = [future[i].status for i in test_ids]
        horizon = np.array([future[i].physical_age - current[i].physical_age for i in test_ids])
        if np.any(horizon < 0):
            raise ModeDataMismatch("truth records are older than the current records")

    artifacts = {"train_ids": list(train_ids), "test_ids": list(test_ids)}
    if mode == WEIBULL:
        model = wb.fit([r.physical_age for r in train_rows], [r.status for r in train_rows])
        preds = predict_weibull(model, test_rows, horizon, config.threshold,
                                config.weibull_conditional)
        artifacts["weibull"] = model
    else:
        learned = learn(history.subset(train_ids), train_rows, config)
        index = None
        if mode == LONG_TERM_MODE:
            index = HistoryIndex.from_history(history.subset(train_ids), learned.encoder,
                                              learned.aged)
        preds = predict_assets(learned, test_rows, horizon, mode, index,
                               config.n_similars, config.threshold)
        artifacts["model"] = learned
    artifacts["predictions"] = preds
    cm = ConfusionMatrix.from_labels(actual, [p.status for p in preds])
    return PipelineResult(cm, metrics(cm), mode, artifacts)


def compare_modes(history: Dataset, truth_future: Dataset, config: PipelineConfig,
                  modes=MODES) -> dict[str, PipelineResult]:
    """Run several prediction modes on one split (stratified by truth status).

    Classification is scored against the current status of the same test
    assets.  Modes that the data cannot support (long-term on one-time data)
    are skipped.
    """
    split_ids = assign_split(history, truth_future, ONE_TIME_MODE, config)
    out = {}
    for mode in modes:
        if mode == LONG_TERM_MODE and history.kind != LONG_TERM:
            continue
        out[mode] = run_pipeline(history, truth_future, mode, config, split_ids)
    return out
