"""Data-quality and data-size sensitivity runs.

Both experiments take a single long-term dataset whose latest inspection
year plays the role of the truth (see :func:`~assetfail.evaluation.fleet.split_truth`)
and rerun the long-term prediction pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..asset_data import NUMERIC, Dataset
from ..errors import InvalidConfig, TooFewPerClass
from .fleet import split_truth
from .metrics import MetricsReport
from .pipeline import (
    LONG_TERM_MODE,
    MIN_PER_CLASS,
    PipelineConfig,
    assign_split,
    run_pipeline,
    train_count,
)


@dataclass(frozen=True)
class Perturbation:
    name: str
    kind: str = "none"        # "none" | "swap" | "inflate"
    count: int = 0
    factor: float = 1.5


NOISE_VARIANTS = (
    Perturbation("original"),
    Perturbation("swap-5", "swap", 5),
    Perturbation("swap-10", "swap", 10),
    Perturbation("inflate-5", "inflate", 5),
    Perturbation("inflate-10", "inflate", 10),
)

SIZES = (1000, 750, 500, 250)


def _latest_rows(d: Dataset) -> dict[str, int]:
    """Index of every asset's most recent record."""
    latest: dict[str, int] = {}
    for i, r in enumerate(d.records):
        j = latest.get(r.asset_id)
        if j is None or (r.inspection_year or 0) > (d.records[j].inspection_year or 0):
            latest[r.asset_id] = i
    return latest


def swap_statuses(d: Dataset, count: int, seed) -> Dataset:
    """Flip Working/Failed on the most recent row of ``count`` random assets.

    Assets are taken from a seeded permutation, so a larger count always
    contains the smaller one's selection.
    """
    if count == 0:
        return d
    latest = _latest_rows(d)
    ids = list(latest)
    if count > len(ids):
        raise InvalidConfig(f"cannot swap {count} of {len(ids)} assets")
    targets = {latest[ids[i]] for i in np.random.default_rng(seed).permutation(len(ids))[:count]}
    rows = [replace(r, status=r.status.flipped()) if i in targets else r
            for i, r in enumerate(d.records)]
    return d.replace_records(rows)


def _current_rows(d: Dataset) -> list[int]:
    """Index of every asset's newest condition row, i.e. the one before its
    truth row (assets with a single row are skipped)."""
    hist = {}
    for i, r in enumerate(d.records):
        hist.setdefault(r.asset_id, []).append(i)
    out = []
    for rows in hist.values():
        if len(rows) >= 2:
            rows = sorted(rows, key=lambda i: d.records[i].inspection_year or 0)
            out.append(rows[-2])
    return sorted(out)


def inflate_features(d: Dataset, count: int, seed, factor: float = 1.5) -> Dataset:
    """Multiply ``count`` random numeric cells by ``factor``.

    Cells are drawn from the rows that describe each asset's present
    condition: the newest row before the one supplying the truth status.
    """
    if count == 0:
        return d
    numeric = [f.name for f in d.schema.features if f.kind == NUMERIC]
    if not numeric:
        raise InvalidConfig("dataset has no numeric features to inflate")
    cells = [(i, name) for i in _current_rows(d) for name in numeric]
    if count > len(cells):
        raise InvalidConfig(f"cannot inflate {count} of {len(cells)} cells")
    picked = np.random.default_rng(seed).permutation(len(cells))[:count]
    records = list(d.records)
    for k in picked:
        i, name = cells[k]
        vals = dict(records[i].values)
        vals[name] = vals[name] * factor
        records[i] = replace(records[i], values=vals)
    return d.replace_records(records)


def perturb(d: Dataset, variant: Perturbation, seed) -> Dataset:
    if variant.kind == "none":
        return d
    if variant.kind == "swap":
        return swap_statuses(d, variant.count, seed)
    if variant.kind == "inflate":
        return inflate_features(d, variant.count, seed, variant.factor)
    raise InvalidConfig(f"unknown perturbation {variant.kind!r}")


def noise_experiment(d: Dataset, seed, config: PipelineConfig | None = None,
                     variants=NOISE_VARIANTS) -> dict[str, MetricsReport]:
    """Long-term prediction metrics per perturbation variant.

    All variants share the split of the unperturbed data.
    """
    config = (config or PipelineConfig(seed)).with_seed(seed)
    clean_hist, clean_truth = split_truth(d)
    split_ids = assign_split(clean_hist, clean_truth, LONG_TERM_MODE, config)
    out = {}
    for variant in variants:
        hist, truth = split_truth(perturb(d, variant, seed))
        out[variant.name] = run_pipeline(hist, truth, LONG_TERM_MODE, config, split_ids).metrics
    return out


def size_experiment(d: Dataset, sizes=SIZES, seed=0,
                    config: PipelineConfig | None = None) -> dict[int, MetricsReport]:
    """Long-term prediction metrics as the amount of data shrinks.

    A size ``s`` keeps a seeded, nested subset of ``train_count(s, ratio)``
    training assets; every size is scored on the same test assets, drawn
    from the full dataset, so differences reflect the data available for
    learning rather than a change of test set.
    """
    config = (config or PipelineConfig(seed)).with_seed(seed)
    n = len(d.asset_ids)
    if max(sizes) > n:
        raise InvalidConfig(f"size {max(sizes)} exceeds the {n} available assets")
    hist, truth = split_truth(d)
    train_ids, test_ids = assign_split(hist, truth, LONG_TERM_MODE, config)
    order = [train_ids[i] for i in np.random.default_rng(seed).permutation(len(train_ids))]
    failed = {r.asset_id: r.failed for r in truth.records}
    out = {}
    for size in sizes:
        m = len(order) if size >= n else min(train_count(size, config.ratio), len(order))
        chosen = set(order[:m])
        keep = [i for i in train_ids if i in chosen]
        n_failed = sum(failed[i] for i in keep)
        if min(n_failed, len(keep) - n_failed) < MIN_PER_CLASS:
            raise TooFewPerClass(f"size {size} leaves {n_failed} Failed and "
                                 f"{len(keep) - n_failed} Working training assets")
        out[size] = run_pipeline(hist, truth, LONG_TERM_MODE, config, (keep, test_ids)).metrics
    return out
