"""Synthetic asset fleets with known ground truth.

Each asset draws a latent condition state (cluster), a starting conditional
age near that state's age centre and an aging rate ``R0 ~ LogNormal``.  Its
rate drifts linearly in time at the state's ``drift`` (relative change per
year), so the true conditional age at time ``t`` is ``R(t) * A_P(t)``.

Condition features follow a path through the state centres ordered by age
centre: the true conditional age is mapped to a fractional position on that
path and feature values are interpolated there (``smoothness=1``) or snapped
to the nearest state (``smoothness=0``), then perturbed by noise.  Statuses
come from the ground-truth logistic link on ``(A_P, A_C_true)`` with one
uniform draw per asset; once an asset has failed it stays failed, even if a
negative drift later lowers its failure probability.

``covariates`` are features fixed per asset that shift its drift instead of
following the condition path: a numeric covariate adds ``drift * z`` for its
standard score ``z``; an unordered categorical one draws a drift offset per
level (``drift_sd``), as for manufacturing batches with their own aging
behaviour.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from importlib import resources

import numpy as np
from scipy.special import expit

from ..asset_data import (
    LONG_TERM,
    NUMERIC,
    ONE_TIME,
    ORDERED,
    AssetRecord,
    Dataset,
    FeatureSchema,
    Status,
)
from ..errors import InvalidConfig, SchemaError


@dataclass(frozen=True)
class StateSpec:
    age_center: float
    age_spread: float
    centers: dict
    weight: float = 1.0
    drift: float = 0.0


@dataclass(frozen=True)
class FleetConfig:
    n_assets: int
    seed: int
    schema: dict
    states: tuple
    noise: dict = field(default_factory=dict)
    categorical_noise: float = 0.0
    smoothness: float = 1.0
    rate_median: float = 1.0
    rate_sigma: float = 0.2
    drift_sd: float = 0.0
    link: tuple = (0.0, 0.0, 0.0)
    inspection_years: tuple = (2012,)
    horizon: int = 5
    decimals: int = 4
    min_age: float = 0.5
    covariates: dict = field(default_factory=dict)

    def __post_init__(self):
        states = tuple(s if isinstance(s, StateSpec) else StateSpec(**s) for s in self.states)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "link", tuple(float(b) for b in self.link))
        object.__setattr__(self, "inspection_years", tuple(int(y) for y in self.inspection_years))
        if self.seed is None:
            raise InvalidConfig("seed is mandatory")
        if self.n_assets < 1 or not states:
            raise InvalidConfig("need at least one asset and one state")
        if len(self.link) != 3:
            raise InvalidConfig("link needs three coefficients")
        if not self.inspection_years or self.horizon < 0:
            raise InvalidConfig("need inspection years and a non-negative horizon")
        if sorted(set(self.inspection_years)) != list(self.inspection_years):
            raise InvalidConfig("inspection years must be strictly increasing")
        if not 0.0 <= self.smoothness <= 1.0 or not 0.0 <= self.categorical_noise <= 1.0:
            raise InvalidConfig("smoothness and categorical_noise must lie in [0, 1]")
        if self.rate_median <= 0 or self.rate_sigma < 0:
            raise InvalidConfig("rate_median must be positive and rate_sigma >= 0")
        if any(s.weight <= 0 or s.age_spread < 0 for s in states):
            raise InvalidConfig("state weights must be positive and spreads >= 0")
        try:
            schema = self.feature_schema
        except SchemaError as exc:
            raise InvalidConfig(str(exc)) from None
        for name, cov in self.covariates.items():
            if name not in schema.names or schema[name].kind == ORDERED:
                raise InvalidConfig(f"covariate {name!r} must be a numeric or "
                                    "unordered-categorical schema feature")
            allowed = {"mean", "sd", "drift"} if schema[name].kind == NUMERIC else {"drift_sd"}
            if set(cov) - allowed:
                raise InvalidConfig(f"covariate {name!r} takes only {sorted(allowed)}")
        for s in states:
            if set(s.centers) != set(schema.names) - set(self.covariates):
                raise InvalidConfig("every state needs a centre for every condition feature")

    @property
    def feature_schema(self) -> FeatureSchema:
        return FeatureSchema.from_dict(self.schema)

    @property
    def truth_year(self) -> int:
        return self.inspection_years[-1] + self.horizon

    def to_dict(self) -> dict:
        d = asdict(self)
        d["states"] = [asdict(s) for s in self.states]
        d["link"] = list(self.link)
        d["inspection_years"] = list(self.inspection_years)
        return d

    @classmethod
    def from_dict(cls, d) -> "FleetConfig":
        try:
            return cls(**d)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from None

    def with_seed(self, seed: int) -> "FleetConfig":
        return replace(self, seed=int(seed))


def load_fleet_config(path) -> FleetConfig:
    with open(path, encoding="utf-8") as fh:
        return FleetConfig.from_dict(json.load(fh))


def bundled_config(name: str = "default") -> FleetConfig:
    """One of the configurations shipped in ``assetfail/configs``."""
    text = resources.files("assetfail.configs").joinpath(f"fleet_{name}.json").read_text("utf-8")
    return FleetConfig.from_dict(json.loads(text))


def _path_position(ac, centers):
    """Fractional state index for conditional ages, extrapolated linearly."""
    idx = np.arange(len(centers), dtype=float)
    if len(centers) == 1:
        return np.zeros_like(ac)
    pos = np.interp(ac, centers, idx)
    lo = ac < centers[0]
    hi = ac > centers[-1]
    pos[lo] = (ac[lo] - centers[0]) / (centers[1] - centers[0])
    pos[hi] = len(centers) - 1 + (ac[hi] - centers[-1]) / (centers[-1] - centers[-2])
    return pos


def _along(pos, values):
    """Piecewise-linear interpolation of per-state values at fractional positions."""
    values = np.asarray(values, dtype=float)
    if len(values) == 1:
        return np.full_like(pos, values[0])
    i = np.clip(np.floor(pos).astype(int), 0, len(values) - 2)
    frac = pos - i
    return values[i] + frac * (values[i + 1] - values[i])


def generate_fleet(cfg: FleetConfig) -> tuple[Dataset, Dataset]:
    """Return ``(history, truth_future)``.

    ``history`` holds one record per asset and inspection year (long-term if
    there is more than one year); ``truth_future`` holds every asset's record
    ``cfg.horizon`` years after the last inspection.
    """
    schema = cfg.feature_schema
    rng = np.random.default_rng(cfg.seed)
    order = np.argsort([s.age_center for s in cfg.states], kind="stable")
    states = [cfg.states[i] for i in order]
    age_centers = np.array([s.age_center for s in states], dtype=float)
    if np.any(np.diff(age_centers) <= 0):
        raise InvalidConfig("state age centres must be distinct")
    n = cfg.n_assets
    weights = np.array([s.weight for s in states], dtype=float)

    state = rng.choice(len(states), size=n, p=weights / weights.sum())
    ac0 = np.maximum(rng.normal(age_centers[state], [states[s].age_spread for s in state]), 1.0)
    r0 = cfg.rate_median * np.exp(cfg.rate_sigma * rng.standard_normal(n))
    ap0 = np.maximum(np.round(ac0 / r0, 1), cfg.min_age)
    drift = np.array([states[s].drift for s in state]) + cfg.drift_sd * rng.standard_normal(n)
    fixed = {}
    for name in sorted(cfg.covariates):
        cov = cfg.covariates[name]
        spec = schema[name]
        if spec.kind == NUMERIC:
            z = rng.standard_normal(n)
            fixed[name] = np.round(cov.get("mean", 0.0) + cov.get("sd", 1.0) * z, cfg.decimals)
            drift = drift + cov.get("drift", 0.0) * z
        else:
            offsets = cov.get("drift_sd", 0.0) * rng.standard_normal(len(spec.levels))
            level = rng.integers(len(spec.levels), size=n)
            fixed[name] = [spec.levels[j] for j in level]
            drift = drift + offsets[level]
    u = rng.random(n)

    years = list(cfg.inspection_years) + [cfg.truth_year]
    t0 = years[0]
    rows_by_year = []
    ever_failed = np.zeros(n, dtype=bool)
    for year in years:
        dt = year - t0
        ap = np.round(ap0 + dt, 6)
        rate = r0 * np.maximum(1.0 + drift * dt, 0.05)
        ac = rate * ap
        pos = _path_position(ac, age_centers)
        snapped = np.clip(np.round(pos), 0, len(states) - 1)
        pos_eff = snapped + cfg.smoothness * (pos - snapped)
        cols = {}
        for spec in schema.features:
            sd = float(cfg.noise.get(spec.name, 0.0))
            if spec.name in fixed:
                cols[spec.name] = fixed[spec.name]
            elif spec.kind == NUMERIC:
                centre = _along(pos_eff, [s.centers[spec.name] for s in states])
                cols[spec.name] = np.round(centre + sd * rng.standard_normal(n), cfg.decimals)
            elif spec.kind == ORDERED:
                centre = _along(pos_eff, [float(s.centers[spec.name]) for s in states])
                lvl = np.clip(np.rint(centre + sd * rng.standard_normal(n)), 1, len(spec.levels))
                cols[spec.name] = [spec.levels[int(c) - 1] for c in lvl]
            else:
                base = [spec.levels.index(states[int(k)].centers[spec.name]) for k in snapped]
                flip = rng.random(n) < cfg.categorical_noise
                other = rng.integers(len(spec.levels), size=n)
                cols[spec.name] = [spec.levels[o if f else b] for b, f, o in zip(base, flip, other)]
        p_fail = expit(cfg.link[0] + cfg.link[1] * ap + cfg.link[2] * ac)
        ever_failed |= u < p_fail
        failed = ever_failed.copy()
        rows_by_year.append((year, ap, cols, failed))

    def records_for(year, ap, cols, failed):
        out = []
        for i in range(n):
            vals = {}
            for spec in schema.features:
                v = cols[spec.name][i]
                vals[spec.name] = str(v) if spec.is_categorical else float(v)
            out.append(AssetRecord(f"{i + 1:04d}", vals, float(ap[i]),
                                   Status.FAILED if failed[i] else Status.WORKING,
                                   year))
        return out

    multi = len(cfg.inspection_years) > 1
    history = []
    for year, ap, cols, failed in rows_by_year[:-1]:
        history.extend(records_for(year, ap, cols, failed))
    if multi:
        history.sort(key=lambda r: (r.asset_id, r.inspection_year))
    year, ap, cols, failed = rows_by_year[-1]
    truth = records_for(year, ap, cols, failed)
    return (Dataset(schema, history, LONG_TERM if multi else ONE_TIME),
            Dataset(schema, truth, LONG_TERM))


def combine(history: Dataset, truth: Dataset) -> Dataset:
    """Single long-term dataset whose latest inspection year is the truth."""
    if truth.records and truth.records[0].inspection_year is None:
        raise InvalidConfig("truth records need an inspection year")
    if any(r.inspection_year is None for r in history.records):
        raise InvalidConfig("history records need inspection years to be combined")
    rows = sorted(list(history.records) + list(truth.records),
                  key=lambda r: (r.asset_id, r.inspection_year))
    return Dataset(history.schema, rows, LONG_TERM)


def split_truth(d: Dataset) -> tuple[Dataset, Dataset]:
    """Inverse of :func:`combine`: each asset's latest record becomes the truth."""
    if d.kind != LONG_TERM:
        raise InvalidConfig("need a long-term dataset to split off the truth year")
    hist, truth = [], []
    for recs in d.histories().values():
        if len(recs) < 2:
            raise InvalidConfig(f"asset {recs[0].asset_id} has a single inspection year")
        hist.extend(recs[:-1])
        truth.append(recs[-1])
    return Dataset(d.schema, hist, LONG_TERM), Dataset(d.schema, truth, LONG_TERM)
