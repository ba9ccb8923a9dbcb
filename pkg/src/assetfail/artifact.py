"""Saved model files.

A model is one JSON document holding everything prediction needs: the
schema, normalisation ranges, cluster centroids with their conditional ages,
the logistic coefficients and, when learned from long-term data, the pool of
historical assets for the similar-asset search.  Reals are written in their
shortest round-trip form, so loading reproduces the in-memory model exactly.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .asset_data import FeatureSchema
from .classifier import LogisticModel
from .clustering import ClusterModel
from .conditional_age import AgedClusterModel, HistoricalAsset, HistoryIndex
from .errors import ArtifactError
from .feature_space import EncodedSet, Encoder, MixedMetric, NormalizationParams

FORMAT = "assetfail-model"
VERSION = 1


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(config: dict) -> str:
    """Short, stable digest of a configuration mapping."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()[:12]


def file_fingerprint(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class ModelArtifact:
    encoder: Encoder
    aged: AgedClusterModel
    logistic: LogisticModel
    index: HistoryIndex | None = None
    k_sweep: tuple = ()
    silhouette: float = float("nan")
    metadata: dict = field(default_factory=dict)

    @property
    def schema(self) -> FeatureSchema:
        return self.encoder.schema

    @classmethod
    def from_learned(cls, learned, index=None, metadata=None) -> "ModelArtifact":
        """Wrap a :class:`~assetfail.evaluation.pipeline.LearnedModel`."""
        return cls(learned.encoder, learned.aged, learned.logistic, index,
                   tuple(learned.k_sweep), float(learned.silhouette), dict(metadata or {}))

    def learned(self):
        from .evaluation.pipeline import LearnedModel
        return LearnedModel(self.encoder, self.aged, self.logistic, self.k_sweep, self.silhouette)

    # -- serialisation ----------------------------------------------------

    def to_dict(self) -> dict:
        base = self.aged.base
        out = {
            "format": FORMAT,
            "version": VERSION,
            "tool_version": __version__,
            "metadata": self.metadata,
            "schema": self.schema.to_dict(),
            "normalization": self.encoder.params.to_dict(),
            "clusters": {
                "k": base.k,
                "centroids": {"numeric": base.centroids.numeric.tolist(),
                              "categorical": base.centroids.categorical.tolist()},
                "member_counts": [int(c) for c in base.member_counts],
                "inertia": float(base.inertia),
                "conditional_ages": [float(a) for a in self.aged.conditional_ages],
            },
            "k_sweep": [[int(k), float(s)] for k, s in self.k_sweep],
            "silhouette": None if np.isnan(self.silhouette) else float(self.silhouette),
            "logistic": self.logistic.to_dict(),
            "similar_pool": None,
        }
        if self.index is not None:
            idx = self.index
            out["similar_pool"] = {
                "age_min": idx.age_min,
                "age_max": idx.age_max,
                "age_weight": float(idx.metric.numeric_weights[-1]),
                "assets": [
                    {"asset_id": a.asset_id, "start_age": a.start_age, "end_age": a.end_age,
                     "start_rate": a.start_rate, "end_rate": a.end_rate, "span": a.span,
                     "numeric": idx.points.numeric[i].tolist(),
                     "categorical": idx.points.categorical[i].tolist()}
                    for i, a in enumerate(idx.assets)],
            }
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ModelArtifact":
        if not isinstance(d, dict) or d.get("format") != FORMAT:
            raise ArtifactError("not an assetfail model file")
        if d.get("version") != VERSION:
            raise ArtifactError(f"unsupported model version {d.get('version')!r}")
        try:
            schema = FeatureSchema.from_dict(d["schema"])
            encoder = Encoder(schema, NormalizationParams.from_dict(d["normalization"]))
            c = d["clusters"]
            q = len(schema.categorical_features)
            centroids = EncodedSet(np.array(c["centroids"]["numeric"], dtype=float),
                                   np.array(c["centroids"]["categorical"],
                                            dtype=np.int64).reshape(int(c["k"]), q))
            counts = np.array(c["member_counts"], dtype=np.int64)
            base = ClusterModel(int(c["k"]), centroids, np.empty(0, dtype=np.int64),
                                float(c["inertia"]), counts)
            aged = AgedClusterModel(base, np.array(c["conditional_ages"], dtype=float),
                                    encoder.params)
            logistic = LogisticModel.from_dict(d["logistic"])
            index = None
            pool = d.get("similar_pool")
            if pool is not None:
                assets = [HistoricalAsset(a["asset_id"], a["start_age"], a["end_age"],
                                          a["start_rate"], a["end_rate"], a["span"])
                          for a in pool["assets"]]
                points = None
                if assets:
                    points = EncodedSet(
                        np.array([a["numeric"] for a in pool["assets"]], dtype=float),
                        np.array([a["categorical"] for a in pool["assets"]],
                                 dtype=np.int64).reshape(len(assets), q))
                index = HistoryIndex(assets, points, pool["age_min"], pool["age_max"],
                                     encoder.metric.extended(pool["age_weight"]))
            sil = d.get("silhouette")
            return cls(encoder, aged, logistic, index,
                       tuple((int(k), float(s)) for k, s in d.get("k_sweep", [])),
                       float("nan") if sil is None else float(sil),
                       dict(d.get("metadata", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise ArtifactError(f"malformed model file: {exc}") from None

    def save(self, path) -> None:
        text = json.dumps(self.to_dict(), indent=1, sort_keys=True, allow_nan=False)
        Path(path).write_text(text + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ModelArtifact":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ArtifactError(f"{path}: not valid JSON ({exc.msg})") from None
        return cls.from_dict(data)
