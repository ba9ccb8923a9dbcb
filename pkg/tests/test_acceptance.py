"""Acceptance checks, one test per criterion; each prints a PASS/FAIL line."""
import time
import warnings
from dataclasses import replace

import numpy as np
import pytest

from assetfail.asset_data import Status
from assetfail.classifier import LabeledExample, design_matrix, gradient, log_likelihood, train
from assetfail.cli import main
from assetfail.clustering import KMeansConfig, kmeans, select_k, silhouette
from assetfail.conditional_age import (
    asset_conditional_age,
    interpolate_rate,
    project_long_term,
    project_one_time,
    project_rate_long_term,
)
from assetfail.evaluation import (
    PipelineConfig,
    bundled_config,
    combine,
    compare_modes,
    generate_fleet,
    noise_experiment,
    size_experiment,
)
from assetfail.evaluation.metrics import ConfusionMatrix, metrics
from assetfail.feature_space import EncodedPoint, EncodedSet, Encoder, MixedMetric
from assetfail.weibull import WeibullModel, fit, weibull_cdf
from conftest import PAPER_TABLES
from test_clustering import brute_force_inertia
from test_conditional_age import fixed_model

SEEDS = range(10)


def verdict(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def mean_f1(runs):
    return {k: float(np.mean([r[k] for r in runs])) for k in runs[0]}


def test_criterion_1_metric_oracle(capsys):
    matched = total = 0
    for (tp, fn, fp, tn), rows in PAPER_TABLES.values():
        shown = metrics(ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)).display()
        for got, want in zip(shown.values(), rows):
            for a, b in zip(got.as_tuple(), want):
                matched += a == b
                total += 1
    verdict(capsys, 1, matched == total == 36, f"{matched}/{total} printed values reproduced")


def test_criterion_2_kmeans_oracle(capsys):
    start = time.perf_counter()
    metric = MixedMetric.uniform(2, 1)
    hits = 0
    for seed in range(100):
        r = np.random.default_rng(seed)
        n, k = int(r.integers(4, 9)), int(r.integers(2, 4))
        pts = EncodedSet(r.random((n, 2)), r.integers(0, 3, (n, 1)))
        model = kmeans(pts, k, metric, KMeansConfig(seed=seed, restarts=50))
        hits += abs(model.inertia - brute_force_inertia(pts, k, metric)) <= 1e-9
    elapsed = time.perf_counter() - start
    verdict(capsys, 2, hits == 100 and elapsed < 10,
            f"{hits}/100 instances at the exhaustive optimum in {elapsed:.1f} s")


def test_criterion_3_select_k(capsys):
    start = time.perf_counter()
    chosen, in_range = [], True
    for seed in SEEDS:
        hist, _ = generate_fleet(bundled_config("three_clusters").with_seed(seed))
        enc = Encoder.fit(hist)
        pts = enc.encode(hist)
        sel = select_k(pts, range(2, 7), enc.metric, KMeansConfig(seed=seed))
        chosen.append(sel.best_k)
        rep = silhouette(pts, sel.model, enc.metric)
        in_range &= bool(np.all(np.abs(rep.per_point) <= 1.0))
    elapsed = time.perf_counter() - start
    hits = chosen.count(3)
    verdict(capsys, 3, hits >= 9 and in_range and elapsed < 30,
            f"K=3 on {hits}/10 seeds (chosen {chosen}), silhouettes in range: {in_range}, "
            f"{elapsed:.1f} s")


def test_criterion_4_conditional_age_algebra(capsys):
    metric = MixedMetric.uniform(1)
    three = fixed_model([[1.0], [np.sqrt(2.0)], [2.0]], [10, 20, 40])
    hand = asset_conditional_age(EncodedPoint([0.0], []), three, metric)
    limit = asset_conditional_age(EncodedPoint([np.sqrt(2.0)], []), three, metric)
    checks = {
        "centroid limit": limit == 20.0,
        "3-cluster case": abs(hand - 30 / 1.75) <= 1e-9,
        "one-time 70": project_one_time(2.0, 30, 5) == 70,
        "long-term 84": abs(project_long_term(project_rate_long_term(2.0, [(1.0, 1.2)]), 30, 5)
                            - 84) <= 1e-9,
        "interpolation endpoints": (interpolate_rate(1, 2, 10, 0) == 1
                                    and interpolate_rate(1, 2, 10, 10) == 2
                                    and interpolate_rate(1, 2, 10, 5) == 1.5),
    }
    failed = [k for k, v in checks.items() if not v]
    verdict(capsys, 4, not failed, f"A_C={hand:.10f}; failing: {failed or 'none'}")


def test_criterion_5_logistic_trainer(capsys):
    r = np.random.default_rng(0)
    ap = r.uniform(5, 70, 300)
    ac = ap * r.lognormal(0, 0.3, 300)
    y = r.random(300) < 1 / (1 + np.exp(-(-8 + 0.05 * ap + 0.1 * ac)))
    X = design_matrix(ap, ac)
    yf = y.astype(float)
    worst = 0.0
    for _ in range(20):
        beta = r.normal(0, [1.0, 0.02, 0.02])
        fd = np.array([(log_likelihood(beta + e, X, yf) - log_likelihood(beta - e, X, yf)) / 2e-5
                       for e in np.eye(3) * 1e-5])
        g = gradient(beta, X, yf)
        worst = max(worst, float(np.max(np.abs(g - fd)) / np.max(np.abs(g))))
    data = [LabeledExample(a, c, Status.FAILED if f else Status.WORKING)
            for a, c, f in zip(ap, ac, y)]
    model = train(data)
    monotone = bool(np.all(np.diff(model.history) >= 0))
    dup = float(np.max(np.abs(train(data + data).coef - model.coef)))
    verdict(capsys, 5, worst < 1e-6 and monotone and dup <= 1e-8,
            f"max relative gradient error {worst:.2e}, monotone log-likelihood {monotone}, "
            f"duplication drift {dup:.1e}")


def test_criterion_6_weibull_recovery(capsys):
    def draw(n, seed):
        u = np.random.default_rng(seed).random(n)
        return 40 * (-np.log1p(-u)) ** (1 / 3)

    x = draw(1000, 0)
    full = fit(x, [Status.FAILED] * 1000)
    t, c = draw(1000, 1), draw(1000, 101)
    cens = fit(np.minimum(t, c), [Status.WORKING if k else Status.FAILED for k in c < t])
    r = np.random.default_rng(2)
    monotone = True
    for _ in range(200):
        m = WeibullModel(float(r.uniform(1, 100)), float(r.uniform(0.2, 10)))
        ages = np.sort(r.uniform(0, 300, 50))
        f = weibull_cdf(m, ages)
        monotone &= bool(np.all(np.diff(f) >= 0) and f.min() >= 0 and f.max() <= 1)
    err_full = max(abs(full.alpha / 40 - 1), abs(full.beta / 3 - 1))
    err_cens = max(abs(cens.alpha / 40 - 1), abs(cens.beta / 3 - 1))
    verdict(capsys, 6, err_full < 0.05 and err_cens < 0.10 and monotone,
            f"uncensored ({full.alpha:.2f}, {full.beta:.3f}) err {err_full:.3f}; "
            f"{np.mean(c < t):.0%} censored ({cens.alpha:.2f}, {cens.beta:.3f}) err "
            f"{err_cens:.3f}; cdf monotone {monotone}")


@pytest.fixture(scope="module")
def fleets():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return [generate_fleet(bundled_config().with_seed(s)) for s in SEEDS]


def test_criterion_7_end_to_end_ordering(capsys, fleets):
    start = time.perf_counter()
    runs = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for seed, (hist, truth) in zip(SEEDS, fleets):
            res = compare_modes(hist, truth, PipelineConfig(seed))
            runs.append({k: v.metrics.macro.f1 for k, v in res.items()})
    f1 = mean_f1(runs)
    elapsed = time.perf_counter() - start
    ok = (f1["classification"] >= f1["predict-long-term"] >= f1["predict-one-time"]
          and f1["predict-long-term"] > f1["weibull"] and elapsed < 300)
    verdict(capsys, 7, ok, ", ".join(f"{k} {v:.4f}" for k, v in f1.items())
            + f", {elapsed:.0f} s")


def test_criterion_8_sensitivity(capsys, fleets):
    start = time.perf_counter()
    noise, size = [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for seed, (hist, truth) in zip(SEEDS, fleets):
            d = combine(hist, truth)
            noise.append({k: v.macro.f1 for k, v in noise_experiment(d, seed).items()})
            size.append({k: v.macro.f1 for k, v in size_experiment(d, seed=seed).items()})
    nz, sz = mean_f1(noise), mean_f1(size)
    elapsed = time.perf_counter() - start
    swaps = nz["original"] >= nz["swap-5"] >= nz["swap-10"]
    sizes = sz[1000] >= sz[750] >= sz[500] >= sz[250]
    swap_worse = nz["swap-10"] < nz["inflate-10"]
    verdict(capsys, 8, swaps and sizes and swap_worse and elapsed < 600,
            ", ".join(f"{k} {v:.4f}" for k, v in nz.items()) + "; "
            + ", ".join(f"size {k} {v:.4f}" for k, v in sz.items()) + f"; {elapsed:.0f} s")


def test_criterion_9_determinism(capsys, tmp_path):
    def commands(root):
        fleet, data, truth, schema = root / "fleet", root / "fleet/history.csv", \
            root / "fleet/truth.csv", root / "fleet/schema.json"
        learning = ["--schema", schema, "--seed", 5, "--k-range", "2..4"]
        return [
            ["synthesize", "--seed", 5, "--n-assets", 200, "--out", fleet],
            ["learn", "--data", data, *learning, "--out", root / "model"],
            ["predict", "--model", root / "model/model.json", "--data", data, "--horizon", 8,
             "--mode", "long-term", "--out", root / "predict"],
            ["evaluate", "--data", data, "--truth", truth, *learning, "--out", root / "eval"],
            ["evaluate", "--data", data, "--truth", truth, *learning, "--experiment", "noise",
             "--out", root / "noise"],
            ["evaluate", "--data", data, "--truth", truth, *learning, "--experiment", "size",
             "--out", root / "size"],
            ["compare", "--data", data, "--truth", truth, *learning, "--out", root / "compare"],
        ]

    codes = []
    for run in ("a", "b"):
        for argv in commands(tmp_path / run):
            codes.append(main([str(a) for a in argv]))
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*")
                   if p.is_file())
    differing = [str(f) for f in files
                 if (tmp_path / "a" / f).read_bytes() != (tmp_path / "b" / f).read_bytes()]
    verdict(capsys, 9, set(codes) == {0} and not differing and len(files) == 19,
            f"{len(files)} output files from 7 commands, exit codes {sorted(set(codes))}, "
            f"differing: {differing or 'none'}")
