import warnings
from dataclasses import replace

import numpy as np
import pytest

from assetfail.asset_data import Status
from assetfail.errors import ModeDataMismatch, SingleClass, TooFewPerClass
from assetfail.evaluation import (
    MODES,
    PipelineConfig,
    bundled_config,
    compare_modes,
    generate_fleet,
    run_pipeline,
    split,
)
from assetfail.evaluation.pipeline import (
    CLASSIFICATION,
    LONG_TERM_MODE,
    ONE_TIME_MODE,
    stratified_split,
    train_count,
)
from conftest import small_fleet


@pytest.fixture(scope="module")
def fleet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return small_fleet(seed=1, n_assets=200)


def test_split_counts():
    ids = [f"{i:03d}" for i in range(200)]
    failed = [i < 51 for i in range(200)]
    train, test = stratified_split(ids, failed, 0.8, seed=0)
    tf = sum(int(i) < 51 for i in train)
    assert (tf, len(train) - tf) == (41, 119)
    assert len(test) == 40 and not set(train) & set(test) and set(train) | set(test) == set(ids)
    assert (train_count(51, 0.8), train_count(149, 0.8)) == (41, 119)
    assert stratified_split(ids, failed, 0.8, seed=0) == (train, test)
    assert stratified_split(ids, failed, 0.8, seed=1) != (train, test)


def test_split_rejects_degenerate_inputs():
    ids = list(range(40))
    failed = [i < 10 for i in ids]
    with pytest.raises(TooFewPerClass):
        stratified_split(ids, failed, 1.0, seed=0)
    with pytest.raises(TooFewPerClass):
        stratified_split(ids, [i < 4 for i in ids], 0.8, seed=0)
    with pytest.raises(SingleClass):
        stratified_split(ids, [False] * 40, 0.8, seed=0)


def test_split_keeps_histories_together(fleet):
    hist, _ = fleet
    train, test = split(hist, 0.8, seed=3)
    assert not set(train.asset_ids) & set(test.asset_ids)
    assert len(train) + len(test) == len(hist)
    assert all(len(v) == 2 for v in train.histories().values())


@pytest.mark.parametrize("mode", MODES)
def test_modes_score_every_test_asset(fleet, mode):
    hist, truth = fleet
    res = run_pipeline(hist, truth, mode, PipelineConfig(seed=2))
    assert res.confusion.total == len(res.artifacts["test_ids"]) == 40
    assert res.mode == mode
    again = run_pipeline(hist, truth, mode, PipelineConfig(seed=2))
    assert again.confusion == res.confusion and again.metrics == res.metrics


def test_predictions_follow_projection(fleet):
    hist, truth = fleet
    res = run_pipeline(hist, truth, ONE_TIME_MODE, PipelineConfig(seed=2))
    for p in res.artifacts["predictions"]:
        assert p.future_conditional_age == pytest.approx(
            p.rate * (p.physical_age + p.horizon))
        assert (p.status is Status.FAILED) == (p.probability > 0.5)


def test_long_term_needs_long_term_history(fleet):
    hist, truth = fleet
    one_time = hist.latest()
    with pytest.raises(ModeDataMismatch):
        run_pipeline(one_time, truth, LONG_TERM_MODE, PipelineConfig(seed=0))
    assert LONG_TERM_MODE not in compare_modes(one_time, truth, PipelineConfig(seed=0))


def test_truth_must_cover_every_asset(fleet):
    hist, truth = fleet
    with pytest.raises(ModeDataMismatch):
        run_pipeline(hist, truth.subset(truth.asset_ids[:-1]), ONE_TIME_MODE, PipelineConfig(0))


def test_compare_modes_shares_split(fleet):
    hist, truth = fleet
    results = compare_modes(hist, truth, PipelineConfig(seed=4))
    assert list(results) == list(MODES)
    tests = {tuple(r.artifacts["test_ids"]) for r in results.values()}
    assert len(tests) == 1


def test_classification_on_separable_fleet():
    cfg = replace(bundled_config("three_clusters"), link=(-200.0, 0.0, 4.0), seed=0)
    hist, truth = generate_fleet(cfg)
    ids = hist.latest().asset_ids
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run_pipeline(hist, None, CLASSIFICATION, PipelineConfig(seed=0), (ids, ids))
    assert res.metrics.macro.f1 > 0.97
