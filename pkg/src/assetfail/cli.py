"""Command line: ``assetfail learn|predict|evaluate|compare|synthesize``.

Every command writes fixed file names into ``--out`` (see the README) and is
deterministic given its flags and seed.  Exit codes: 0 success, 1 domain
error (bad data, failed fit, ...), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .artifact import ModelArtifact, config_hash, file_fingerprint
from .asset_data import (
    LONG_TERM,
    Status,
    detect_kind,
    load_dataset,
    load_schema,
    require_nonempty,
    save_dataset,
    save_schema,
    validate_dataset,
)
from .conditional_age import HistoryIndex
from .errors import AssetFailError, InvalidConfig, ModeDataMismatch
from .evaluation.experiments import NOISE_VARIANTS, noise_experiment, size_experiment
from .evaluation.fleet import bundled_config, combine, generate_fleet, load_fleet_config, split_truth
from .evaluation.metrics import ConfusionMatrix, metrics
from .evaluation.pipeline import (
    CLASSIFICATION,
    LONG_TERM_MODE,
    MODES,
    ONE_TIME_MODE,
    WEIBULL,
    PipelineConfig,
    compare_modes,
    learn,
    predict_assets,
    run_pipeline,
    split,
)
from .reports import f1_row_table, macro_table, metrics_rows, write_csv, write_text

PREDICT_MODES = {"one-time": ONE_TIME_MODE, "long-term": LONG_TERM_MODE}


def k_range(text: str) -> tuple[int, int]:
    """Parse ``"2..6"`` (or a single ``"3"``) into an inclusive range."""
    lo, sep, hi = text.partition("..")
    try:
        lo, hi = int(lo), int(hi if sep else lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None
    if lo < 2 or hi < lo:
        raise argparse.ArgumentTypeError(f"empty or invalid K range {text!r} (need 2 <= LO <= HI)")
    return lo, hi


def sizes_list(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated sizes, got {text!r}") from None
    if not sizes or min(sizes) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive")
    return sizes


# -- helpers ---------------------------------------------------------------

def _out(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(path, schema, drop_outliers=False):
    d = load_dataset(path, schema, detect_kind(path), drop_outliers)
    require_nonempty(d)
    return d


def _pipeline_config(args, **extra) -> PipelineConfig:
    return PipelineConfig(seed=args.seed, ratio=args.ratio, k_range=tuple(args.k_range),
                          restarts=args.restarts, n_similars=args.similars, **extra)


def _history_and_truth(args, schema):
    """(history, truth) from --data/--truth, or the data's latest year as truth."""
    data = _load(args.data, schema)
    if args.truth:
        return data, _load(args.truth, schema)
    if data.kind != LONG_TERM:
        raise ModeDataMismatch("without --truth the data must be long-term; "
                               "its latest inspection year is used as the truth")
    return split_truth(data)


def _fingerprints(args) -> dict:
    out = {"data_sha256": file_fingerprint(args.data)}
    if getattr(args, "truth", None):
        out["truth_sha256"] = file_fingerprint(args.truth)
    return out


def _prediction_rows(preds):
    return [(p.asset_id, p.physical_age, p.conditional_age, p.rate, p.future_rate, p.horizon,
             p.future_physical_age, p.future_conditional_age, p.probability, p.status, p.method)
            for p in preds]


PREDICTION_COLUMNS = ["asset_id", "physical_age", "conditional_age", "aging_rate",
                      "future_aging_rate", "horizon", "future_physical_age",
                      "future_conditional_age", "probability", "status", "method"]


def _metric_rows(report, cm):
    rows = [(name, p, r, f) for name, p, r, f in metrics_rows(report)]
    return rows, {"tp": cm.tp, "fp": cm.fp, "tn": cm.tn, "fn": cm.fn}


# -- commands --------------------------------------------------------------

def cmd_learn(args) -> str:
    schema = load_schema(args.schema)
    data = _load(args.data, schema, args.drop_outliers)
    issues = validate_dataset(data)
    config = _pipeline_config(args)
    train, test = split(data, config.ratio, config.seed)
    train_current = train.latest().records
    learned = learn(train, train_current, config)
    index = None
    if data.kind == LONG_TERM:
        index = HistoryIndex.from_history(train, learned.encoder, learned.aged)

    test_current = test.latest().records
    preds = predict_assets(learned, test_current, 0.0, CLASSIFICATION,
                           threshold=config.threshold)
    cm = ConfusionMatrix.from_labels([r.status for r in test_current], [p.status for p in preds])
    report = metrics(cm)

    settings = {"command": "learn", **config.to_dict(), "drop_outliers": args.drop_outliers}
    meta = {"seed": args.seed, "config_hash": config_hash(settings), "mode": "learn",
            "dataset_kind": data.kind, "dataset_sha256": file_fingerprint(args.data),
            "train_assets": len(train_current), "test_assets": len(test_current),
            "tool_version": __version__}
    out = _out(args.out)
    ModelArtifact.from_learned(learned, index, meta).save(out / "model.json")

    head = {k: meta[k] for k in ("seed", "config_hash", "mode")}
    write_csv(out / "k_sweep.csv", head, ["k", "silhouette"], learned.k_sweep)
    num_names = [f.name for f in schema.numeric_features]
    cat_specs = schema.categorical_features
    centroids = learned.aged.centroids
    rows = []
    for j, (cid, members, age) in enumerate(learned.aged.table()):
        cats = [spec.levels[int(c)] for spec, c in zip(cat_specs, centroids.categorical[j])]
        rows.append((cid, members, age, *centroids.numeric[j].tolist(), *cats))
    write_csv(out / "cluster_ages.csv", {**head, "centroids": "normalised feature space"},
              ["cluster", "members", "conditional_age", *num_names,
               *[s.name for s in cat_specs]], rows)
    metric_rows, counts = _metric_rows(report, cm)
    write_csv(out / "holdout_metrics.csv", {**head, **counts},
              ["category", "precision", "recall", "f1"], metric_rows)

    lg = learned.logistic
    lines = [
        f"records: {len(data)} ({data.kind}), assets: {len(data.asset_ids)}",
        f"train assets: {len(train_current)}, test assets: {len(test_current)}",
        "",
        "data checks:",
        *([f"  {w}" for w in issues] or ["  none"]),
        "",
        "K sweep (average silhouette):",
        *[f"  K={k}: {s:.4f}" for k, s in learned.k_sweep],
        f"  chosen K={learned.aged.base.k}",
        "",
        "cluster conditional ages:",
        f"  {'Cluster':<10}{'Members':>8}{'Conditional age':>18}",
        *[f"  {cid:<10}{n:>8}{age:>18.2f}" for cid, n, age in learned.aged.table()],
        "",
        "logistic classifier: logit p = b0 + b1 * A_P + b2 * A_C",
        f"  b0 = {lg.beta0!r}",
        f"  b1 = {lg.beta1!r}",
        f"  b2 = {lg.beta2!r}",
        f"  iterations = {lg.iterations}, separated = {lg.separated}",
        "",
        "hold-out classification (current status):",
        report.table(),
        f"similar-asset pool: {len(index) if index is not None else 0} assets",
    ]
    write_text(out / "learning_report.txt", head, "\n".join(lines))
    return f"learned K={learned.aged.base.k}; hold-out macro F1 {report.macro.f1:.4f}"


def cmd_predict(args) -> str:
    art = ModelArtifact.load(args.model)
    schema = load_schema(args.schema) if args.schema else art.schema
    if schema.to_dict() != art.schema.to_dict():
        raise ModeDataMismatch("--schema differs from the schema stored in the model")
    data = _load(args.data, schema)
    method = PREDICT_MODES[args.mode]
    index = None
    if method == LONG_TERM_MODE:
        if data.kind != LONG_TERM:
            raise ModeDataMismatch("long-term prediction needs long-term data (InspectionYear column)")
        if art.index is None:
            raise ModeDataMismatch("the model was learned from one-time data and has no "
                                   "similar-asset pool")
        index = art.index
    if args.horizon < 0:
        raise InvalidConfig("horizon must be >= 0")
    current = data.latest().records
    preds = predict_assets(art.learned(), current, args.horizon, method, index,
                           args.similars, args.threshold)
    settings = {"command": "predict", "mode": method, "horizon": args.horizon,
                "similars": args.similars, "threshold": args.threshold,
                "model_sha256": file_fingerprint(args.model)}
    meta = {"seed": art.metadata.get("seed"), "config_hash": config_hash(settings),
            "mode": method, "horizon": float(args.horizon),
            "data_sha256": file_fingerprint(args.data)}
    out = _out(args.out)
    write_csv(out / "predictions.csv", meta, PREDICTION_COLUMNS, _prediction_rows(preds))
    n_failed = sum(p.status is Status.FAILED for p in preds)
    return f"{len(preds)} assets scored, {n_failed} predicted Failed"


def _variant_label(name: str) -> str:
    kind, _, count = name.partition("-")
    if not count:
        return name.capitalize()
    return f"{'Swap' if kind == 'swap' else 'Inflate'} {count}"


def cmd_evaluate(args) -> str:
    schema = load_schema(args.schema)
    out = _out(args.out)
    extra = {"weibull_conditional": not args.unconditional}
    config = _pipeline_config(args, **extra)
    settings = {"command": "evaluate", "experiment": args.experiment, **config.to_dict()}

    if args.experiment == "pipeline":
        mode = args.mode
        settings["mode"] = mode
        if mode == CLASSIFICATION and not args.truth:
            history, truth = _load(args.data, schema), None
        else:
            history, truth = _history_and_truth(args, schema)
        result = run_pipeline(history, truth, mode, config)
        meta = {"seed": args.seed, "config_hash": config_hash(settings), "mode": mode,
                **_fingerprints(args)}
        rows, counts = _metric_rows(result.metrics, result.confusion)
        write_csv(out / "metrics.csv", {**meta, **counts},
                  ["category", "precision", "recall", "f1"], rows)
        write_text(out / "metrics.txt", meta, result.metrics.table())
        write_csv(out / "predictions.csv", meta, PREDICTION_COLUMNS,
                  _prediction_rows(result.artifacts["predictions"]))
        return f"{mode}: macro F1 {result.metrics.macro.f1:.4f}"

    history, truth = _history_and_truth(args, schema)
    combined = combine(history, truth)
    if args.experiment == "noise":
        results = noise_experiment(combined, args.seed, config)
        columns = [_variant_label(v.name) for v in NOISE_VARIANTS]
        keys = [v.name for v in NOISE_VARIANTS]
        label, stem = "Data quality", "noise_sensitivity"
    else:
        n = len(combined.asset_ids)
        sizes = args.sizes or tuple(int(np.floor(n * f + 0.5)) for f in (1.0, 0.75, 0.5, 0.25))
        settings["sizes"] = list(sizes)
        results = size_experiment(combined, sizes, args.seed, config)
        columns = keys = list(sizes)
        label, stem = "Data size", "size_sensitivity"
    meta = {"seed": args.seed, "config_hash": config_hash(settings), "mode": LONG_TERM_MODE,
            **_fingerprints(args)}
    rows = [(k, *results[k].macro.as_tuple()) for k in keys]
    write_csv(out / f"{stem}.csv", meta, ["variant", "precision", "recall", "f1"], rows)
    write_text(out / f"{stem}.txt", meta,
               f1_row_table(label, columns, [results[k].macro.f1 for k in keys]))
    return "; ".join(f"{k}: {results[k].macro.f1:.4f}" for k in keys)


def cmd_compare(args) -> str:
    schema = load_schema(args.schema)
    history, truth = _history_and_truth(args, schema)
    config = _pipeline_config(args, weibull_conditional=not args.unconditional)
    results = compare_modes(history, truth, config)
    variant = "unconditional" if args.unconditional else "conditional"
    settings = {"command": "compare", **config.to_dict()}
    meta = {"seed": args.seed, "config_hash": config_hash(settings), "mode": "compare",
            "weibull": variant, **_fingerprints(args)}
    rows = []
    for mode, res in results.items():
        cm = res.confusion
        rows.append((mode, *res.metrics.macro.as_tuple(), cm.tp, cm.fp, cm.tn, cm.fn))
    out = _out(args.out)
    write_csv(out / "comparison.csv", meta,
              ["method", "precision", "recall", "f1", "tp", "fp", "tn", "fn"], rows)
    names = {WEIBULL: f"weibull ({variant})"}
    write_text(out / "comparison.txt", meta,
               macro_table([(names.get(m, m), r.metrics) for m, r in results.items()]))
    return "; ".join(f"{m}: {r.metrics.macro.f1:.4f}" for m, r in results.items())


def cmd_synthesize(args) -> str:
    path = Path(args.config)
    cfg = load_fleet_config(path) if path.suffix == ".json" or path.exists() else bundled_config(args.config)
    cfg = cfg.with_seed(args.seed)
    if args.n_assets is not None:
        cfg = type(cfg).from_dict({**cfg.to_dict(), "n_assets": args.n_assets})
    history, truth = generate_fleet(cfg)
    out = _out(args.out)
    save_dataset(history, out / "history.csv")
    save_dataset(truth, out / "truth.csv")
    save_schema(cfg.feature_schema, out / "schema.json")
    (out / "fleet_config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True)
                                           + "\n", encoding="utf-8")
    return (f"{len(history.asset_ids)} assets, {len(history)} history records, "
            f"truth year {cfg.truth_year}")


# -- parser ----------------------------------------------------------------

def _common_learning(p, seed_required=True):
    p.add_argument("--seed", type=int, required=seed_required)
    p.add_argument("--k-range", type=k_range, default=(2, 6), metavar="LO..HI")
    p.add_argument("--ratio", type=float, default=0.8, help="training share per class")
    p.add_argument("--restarts", type=int, default=10, help="k-means restarts per K")
    p.add_argument("--similars", type=int, default=5, help="similar assets for long-term mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="assetfail",
                                     description="Asset class failure prediction from condition data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="cluster, derive conditional ages and train the classifier")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--drop-outliers", action="store_true",
                   help="exclude records outside the 3*IQR fences before learning")
    _common_learning(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("predict", help="score assets with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--schema", help="defaults to the schema stored in the model")
    p.add_argument("--horizon", type=float, default=0.0, help="years ahead")
    p.add_argument("--mode", choices=sorted(PREDICT_MODES), default="one-time")
    p.add_argument("--similars", type=int, default=5)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="run the evaluation protocol or a sensitivity experiment")
    p.add_argument("--data", required=True)
    p.add_argument("--truth", help="future records; default: the data's latest inspection year")
    p.add_argument("--schema", required=True)
    p.add_argument("--experiment", choices=["pipeline", "noise", "size"], default="pipeline")
    p.add_argument("--mode", choices=MODES, default=LONG_TERM_MODE,
                   help="pipeline mode (experiment=pipeline)")
    p.add_argument("--sizes", type=sizes_list, help="asset counts for experiment=size")
    p.add_argument("--unconditional", action="store_true",
                   help="Weibull baseline uses F(A_P+T) instead of the conditional probability")
    p.add_argument("--out", required=True)
    _common_learning(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="all prediction modes and the Weibull baseline on one split")
    p.add_argument("--data", required=True)
    p.add_argument("--truth")
    p.add_argument("--schema", required=True)
    p.add_argument("--unconditional", action="store_true")
    p.add_argument("--out", required=True)
    _common_learning(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synthesize", help="generate a synthetic fleet")
    p.add_argument("--config", default="default",
                   help="fleet config JSON file or bundled name (default, three_clusters)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-assets", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synthesize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            message = args.func(args)
    except (AssetFailError, ValueError, OSError) as exc:
        print(f"assetfail {args.command}: error: {exc}", file=sys.stderr)
        return 1
    print(message)
    return 0


if __name__ == "__main__":
    sys.exit(main())
