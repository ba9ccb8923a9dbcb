"""Two-parameter Weibull baseline on physical age.

Failed records are exact failure times, Working records are right-censored
at their current age.  The scale is profiled out in closed form,

    alpha(beta)^beta = sum(x_i^beta) / n_failed,

which leaves a one-dimensional, strictly decreasing score equation in beta
that is solved by a bracketed Newton iteration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .asset_data import Status
from .errors import InsufficientFailures, NegativeAge, NotConverged

BETA_BRACKET = (0.05, 50.0)


@dataclass(frozen=True)
class WeibullModel:
    alpha: float
    beta: float
    log_likelihood: float = float("nan")
    n_failures: int = 0
    n_censored: int = 0
    iterations: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)
                and self.alpha > 0 and self.beta > 0):
            raise ValueError("Weibull parameters must be finite and positive")

    def to_dict(self):
        return {"alpha": self.alpha, "beta": self.beta, "log_likelihood": self.log_likelihood,
                "n_failures": self.n_failures, "n_censored": self.n_censored}


def weibull_cdf(model: WeibullModel, age):
    a = np.asarray(age, dtype=float)
    if np.any(a < 0):
        raise NegativeAge(value=float(np.min(a)))
    out = -np.expm1(-(a / model.alpha) ** model.beta)
    return float(out) if out.ndim == 0 else out


def log_likelihood(alpha, beta, ages, failed) -> float:
    """Right-censored Weibull log-likelihood."""
    x = np.asarray(ages, dtype=float)
    f = np.asarray(failed, dtype=bool)
    z = x / alpha
    ll = np.sum(np.log(beta / alpha) + (beta - 1) * np.log(z[f]))
    return float(ll - np.sum(z ** beta))


def _score(beta, logx, logt_sum, d):
    """Profile score g(beta) and its derivative, on log-ages for stability."""
    e = beta * logx
    w = np.exp(e - e.max())
    s0 = w.sum()
    s1 = (w * logx).sum() / s0
    s2 = (w * logx * logx).sum() / s0
    g = d / beta + logt_sum - d * s1
    dg = -d / beta ** 2 - d * (s2 - s1 * s1)
    return g, dg


def _alpha(beta, logx, d):
    e = beta * logx
    m = e.max()
    return float(np.exp((m + np.log(np.exp(e - m).sum()) - np.log(d)) / beta))


def fit(ages, statuses, tol: float = 1e-10, max_iters: int = 200) -> WeibullModel:
    """Maximum-likelihood (alpha, beta) from ages and Working/Failed statuses."""
    x = np.asarray(ages, dtype=float)
    failed = np.array([Status.parse(s) is Status.FAILED for s in statuses], dtype=bool)
    if x.shape != failed.shape:
        raise ValueError("ages and statuses differ in length")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("all ages must be positive and finite")
    d = int(failed.sum())
    if d < 2:
        raise InsufficientFailures(f"need at least 2 failures, got {d}")
    logx = np.log(x)
    logt_sum = float(logx[failed].sum())

    lo, hi = BETA_BRACKET
    g_lo, _ = _score(lo, logx, logt_sum, d)
    g_hi, _ = _score(hi, logx, logt_sum, d)
    if g_hi > 0:
        raise NotConverged(f"Weibull shape diverges above the cap beta={hi:g} "
                           "(failure ages have no spread)")
    if g_lo < 0:
        raise NotConverged(f"Weibull shape falls below beta={lo:g}")

    beta = 1.0 if lo < 1.0 < hi else 0.5 * (lo + hi)
    for it in range(1, max_iters + 1):
        g, dg = _score(beta, logx, logt_sum, d)
        if g > 0:
            lo = beta
        else:
            hi = beta
        step = -g / dg if dg < 0 else np.inf
        new = beta + step
        if not (lo < new < hi):
            new = 0.5 * (lo + hi)
        if abs(new - beta) < tol:
            beta = new
            break
        beta = new
    else:
        raise NotConverged(f"Weibull fit did not converge in {max_iters} iterations", max_iters)
    alpha = _alpha(beta, logx, d)
    return WeibullModel(alpha, beta, log_likelihood(alpha, beta, x, failed),
                        d, int(len(x) - d), it)


def failure_probability(model: WeibullModel, physical_age, horizon, conditional: bool = True):
    """Probability of failing within ``horizon`` years.

    Conditional on survival to ``physical_age`` by default; with
    ``conditional=False`` this is the plain CDF at ``physical_age + horizon``.
    """
    a = np.asarray(physical_age, dtype=float)
    t = np.asarray(horizon, dtype=float)
    if np.any(a < 0):
        raise NegativeAge(value=float(np.min(a)))
    if np.any(t < 0):
        raise ValueError("horizon must be >= 0")
    if conditional:
        h = ((a + t) / model.alpha) ** model.beta - (a / model.alpha) ** model.beta
        out = -np.expm1(-h)
    else:
        out = -np.expm1(-((a + t) / model.alpha) ** model.beta)
    return float(out) if np.ndim(out) == 0 else out


def predict(model: WeibullModel, physical_age, horizon, threshold: float = 0.5,
            conditional: bool = True):
    """(probability, status) with Failed iff probability > threshold."""
    p = failure_probability(model, physical_age, horizon, conditional)
    if np.ndim(p) == 0:
        return p, (Status.FAILED if p > threshold else Status.WORKING)
    return p, np.array([Status.FAILED if v > threshold else Status.WORKING for v in np.ravel(p)],
                       dtype=object).reshape(np.shape(p))


def survival_curve(model: WeibullModel, ages) -> list[tuple[float, float]]:
    ages = np.asarray(ages, dtype=float)
    return list(zip(ages.tolist(), np.atleast_1d(weibull_cdf(model, ages)).tolist()))
