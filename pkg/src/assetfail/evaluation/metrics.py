"""Confusion matrices and per-class / macro precision, recall and F1."""
from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from ..asset_data import Status


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer")
            object.__setattr__(self, name, int(v))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_labels(cls, actual, predicted) -> "ConfusionMatrix":
        """Build from two aligned sequences of statuses (Failed = positive)."""
        a = np.array([Status.parse(s) is Status.FAILED for s in actual], dtype=bool)
        p = np.array([Status.parse(s) is Status.FAILED for s in predicted], dtype=bool)
        if a.shape != p.shape:
            raise ValueError("actual and predicted differ in length")
        return cls(int(np.sum(a & p)), int(np.sum(~a & p)),
                   int(np.sum(~a & ~p)), int(np.sum(a & ~p)))

    def to_dict(self):
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def round_half_up(x: float, places: int = 2) -> float:
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))


def _ratio(num, den, flags, name):
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def _f1(p, r, flags, name):
    if p + r == 0:
        flags.append(name)
        return 0.0
    return 2 * p * r / (p + r)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float

    def rounded(self, places=2) -> "ClassMetrics":
        return ClassMetrics(round_half_up(self.precision, places),
                            round_half_up(self.recall, places),
                            round_half_up(self.f1, places))

    def as_tuple(self):
        return (self.precision, self.recall, self.f1)


@dataclass(frozen=True)
class MetricsReport:
    failed: ClassMetrics
    working: ClassMetrics
    macro: ClassMetrics
    flags: tuple = field(default=(), compare=False)

    def display(self, places=2) -> dict:
        """Rounded values keyed like the printed tables."""
        return {"Asset Failed Status": self.failed.rounded(places),
                "Asset Working Status": self.working.rounded(places),
                "Average": self.macro.rounded(places)}

    def table(self) -> str:
        lines = [f"{'Evaluation Category':<24}{'Precision':>10}{'Recall':>10}{'F1-Score':>10}"]
        for name, m in self.display().items():
            lines.append(f"{name:<24}{m.precision:>10.2f}{m.recall:>10.2f}{m.f1:>10.2f}")
        return "\n".join(lines)

    def to_dict(self):
        return {k: {"precision": m.precision, "recall": m.recall, "f1": m.f1}
                for k, m in (("failed", self.failed), ("working", self.working),
                             ("macro", self.macro))}


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Per-class and macro metrics.

    Macro values average the unrounded per-class numbers; zero denominators
    give 0 and are listed in ``flags``.
    """
    flags: list[str] = []
    fp_ = _ratio(cm.tp, cm.tp + cm.fp, flags, "failed.precision")
    fr_ = _ratio(cm.tp, cm.tp + cm.fn, flags, "failed.recall")
    wp_ = _ratio(cm.tn, cm.tn + cm.fn, flags, "working.precision")
    wr_ = _ratio(cm.tn, cm.tn + cm.fp, flags, "working.recall")
    failed = ClassMetrics(fp_, fr_, _f1(fp_, fr_, flags, "failed.f1"))
    working = ClassMetrics(wp_, wr_, _f1(wp_, wr_, flags, "working.f1"))
    macro = ClassMetrics(*((a + b) / 2 for a, b in zip(failed.as_tuple(), working.as_tuple())))
    return MetricsReport(failed, working, macro, tuple(flags))
