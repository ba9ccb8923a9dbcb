"""Two-input logistic failure classifier on (physical age, conditional age).

Failed is the positive class.  Training runs Newton/IRLS steps on
standardised inputs with step halving, then maps the coefficients back to
raw years so that ``L = 1 / (1 + exp(-(b0 + b1*A_P + b2*A_C)))`` holds
directly.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_expit

from .asset_data import Status
from .errors import NotConverged, SingleClass


class SeparationWarning(RuntimeWarning):
    """Training data is (quasi-)separable; coefficients were capped."""


@dataclass(frozen=True)
class LabeledExample:
    physical_age: float
    conditional_age: float
    status: Status

    @property
    def failed(self) -> bool:
        return Status.parse(self.status) is Status.FAILED


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    max_iters: int = 100
    tolerance: float = 1e-8
    coef_cap: float = 50.0


@dataclass(frozen=True)
class LogisticModel:
    beta0: float
    beta1: float
    beta2: float
    iterations: int = 0
    log_likelihood: float = float("nan")
    means: tuple = (0.0, 0.0)
    scales: tuple = (1.0, 1.0)
    standardized: tuple = (0.0, 0.0, 0.0)
    separated: bool = False
    history: tuple = field(default=(), compare=False)

    @property
    def coef(self) -> np.ndarray:
        return np.array([self.beta0, self.beta1, self.beta2])

    def score(self, physical_age, conditional_age):
        return (self.beta0 + self.beta1 * np.asarray(physical_age, dtype=float)
                + self.beta2 * np.asarray(conditional_age, dtype=float))

    def to_dict(self):
        return {"beta0": self.beta0, "beta1": self.beta1, "beta2": self.beta2,
                "iterations": self.iterations,
                "log_likelihood": None if np.isnan(self.log_likelihood) else self.log_likelihood,
                "means": list(self.means), "scales": list(self.scales),
                "standardized": list(self.standardized), "separated": self.separated}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["beta0"]), float(d["beta1"]), float(d["beta2"]),
                   int(d.get("iterations", 0)),
                   float("nan") if d.get("log_likelihood") is None else float(d["log_likelihood"]),
                   tuple(d.get("means", (0.0, 0.0))), tuple(d.get("scales", (1.0, 1.0))),
                   tuple(d.get("standardized", (0.0, 0.0, 0.0))), bool(d.get("separated", False)))


def oversample(examples, seed) -> list:
    """Duplicate minority-class examples until both classes are equally large.

    Every minority example is repeated ``majority // minority`` times and the
    remainder is drawn without replacement by ``seed``.  The result is shuffled.
    """
    examples = list(examples)
    pos = [e for e in examples if e.failed]
    neg = [e for e in examples if not e.failed]
    if not pos or not neg:
        raise SingleClass("oversampling needs both Working and Failed examples")
    rng = np.random.default_rng(seed)
    minority, majority = (pos, neg) if len(pos) <= len(neg) else (neg, pos)
    reps, extra = divmod(len(majority), len(minority))
    extras = rng.choice(len(minority), size=extra, replace=False) if extra else []
    out = majority + minority * reps + [minority[i] for i in sorted(extras)]
    return [out[i] for i in rng.permutation(len(out))]


def design_matrix(physical_age, conditional_age) -> np.ndarray:
    ap = np.asarray(physical_age, dtype=float)
    ac = np.asarray(conditional_age, dtype=float)
    return np.column_stack([np.ones_like(ap), ap, ac])


def log_likelihood(beta, X, y) -> float:
    """Binomial log-likelihood of the logistic model, summed over rows."""
    z = X @ np.asarray(beta, dtype=float)
    return float(np.sum(y * log_expit(z) + (1 - y) * log_expit(-z)))


def gradient(beta, X, y) -> np.ndarray:
    return X.T @ (y - expit(X @ np.asarray(beta, dtype=float)))


def hessian(beta, X) -> np.ndarray:
    p = expit(X @ np.asarray(beta, dtype=float))
    w = p * (1 - p)
    return -(X * w[:, None]).T @ X


def _arrays(examples):
    ap = np.array([e.physical_age for e in examples], dtype=float)
    ac = np.array([e.conditional_age for e in examples], dtype=float)
    y = np.array([1.0 if e.failed else 0.0 for e in examples])
    return ap, ac, y


def train(examples, config: TrainConfig | None = None) -> LogisticModel:
    """Maximum-likelihood fit of the logistic model.

    Raises :class:`NotConverged` if the gradient max-norm (of the mean
    log-likelihood, standardised units) is still above ``tolerance`` after
    ``max_iters`` Newton steps.  Separable data triggers a
    :class:`SeparationWarning` and a coefficient cap instead.
    """
    config = config or TrainConfig()
    examples = list(examples)
    if len(examples) < 3:
        raise SingleClass("need at least 3 training examples")
    ap, ac, y = _arrays(examples)
    if y.min() == y.max():
        raise SingleClass("training data contains a single class")
    raw = np.column_stack([ap, ac])
    means = raw.mean(axis=0)
    scales = raw.std(axis=0)
    scales = np.where(scales > 0, scales, 1.0)
    X = np.column_stack([np.ones(len(y)), (raw - means) / scales])
    n = len(y)

    beta = np.zeros(3)
    ll = log_likelihood(beta, X, y)
    history = [ll]
    separated = converged = False
    steps = 0
    while True:
        g = gradient(beta, X, y) / n
        if np.max(np.abs(g)) < config.tolerance:
            converged = True
            break
        if steps >= config.max_iters:
            break
        H = hessian(beta, X) / n
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, -g, rcond=None)[0]
        t = 1.0
        cand = beta + step
        cand_ll = log_likelihood(cand, X, y)
        while cand_ll < ll and t > 1e-10:
            t *= 0.5
            cand = beta + t * step
            cand_ll = log_likelihood(cand, X, y)
        if cand_ll < ll:
            # no ascent left at machine precision
            converged = True
            break
        beta, ll = cand, cand_ll
        steps += 1
        history.append(ll)
        if np.max(np.abs(beta)) > config.coef_cap:
            beta = np.clip(beta, -config.coef_cap, config.coef_cap)
            ll = log_likelihood(beta, X, y)
            separated = True
            warnings.warn("training data is separable; logistic coefficients capped at "
                          f"{config.coef_cap:g} (standardised units)", SeparationWarning,
                          stacklevel=2)
            break
    if not (converged or separated):
        raise NotConverged(f"logistic training did not converge in {steps} iterations", steps)

    b0 = beta[0] - beta[1] * means[0] / scales[0] - beta[2] * means[1] / scales[1]
    b1 = beta[1] / scales[0]
    b2 = beta[2] / scales[1]
    return LogisticModel(float(b0), float(b1), float(b2), steps, float(ll),
                         tuple(float(m) for m in means), tuple(float(s) for s in scales),
                         tuple(float(b) for b in beta), separated, tuple(history))


def predict_probability(model: LogisticModel, physical_age, conditional_age):
    p = expit(model.score(physical_age, conditional_age))
    return float(p) if np.ndim(p) == 0 else p


def classify(model: LogisticModel, physical_age, conditional_age, threshold: float = 0.5):
    """Failed iff the failure probability is strictly above ``threshold``."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    p = predict_probability(model, physical_age, conditional_age)
    if np.ndim(p) == 0:
        return Status.FAILED if p > threshold else Status.WORKING
    return np.array([Status.FAILED if v > threshold else Status.WORKING for v in np.ravel(p)],
                    dtype=object).reshape(np.shape(p))
