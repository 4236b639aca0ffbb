"""Hyper-parameter grids, k-fold grid search and the trained-model container."""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..core import FeatureMatrix, Frequency
from ..exceptions import FrequencyError, InsufficientDataError, MVError
from ..preprocessing import ScalingParams, SplitDataset, fit_scaling, inverse_transform, transform
from .ann import ANNRegressor
from .knn import KNNRegressor
from .ols import OLSRegressor
from .svr import SVRRegressor

__all__ = [
    "ESTIMATORS",
    "FAMILIES",
    "DEFAULT_GRID",
    "HyperGrid",
    "SearchResult",
    "TrainedModel",
    "TrainingRun",
    "search",
    "grid_search",
    "train_all",
    "fingerprint",
]

FAMILIES = ("ols", "knn", "ann", "svm")

ESTIMATORS = {
    "ols": OLSRegressor,
    "knn": KNNRegressor,
    "ann": ANNRegressor,
    "svm": SVRRegressor,
}

DEFAULT_GRID = {
    "ols": {"intercept": (True, False)},
    "knn": {"k": tuple(range(1, 11)), "p": (1, 2, 3, 4, 5), "kernel": ("triangular",)},
    "ann": {
        "hidden_units": tuple(range(1, 11)),
        "max_iter": (1000,),
        "threshold": (0.01,),
        "decay": (0.001, 0.01, 0.1, 0.5),
    },
    "svm": {"kernel": ("linear",), "cost": (0.25, 0.5, 1.0)},
}


def _family(name: str) -> str:
    key = str(name).lower()
    aliases = {"k-nn": "knn", "svr": "svm", "nn": "ann", "lm": "ols"}
    key = aliases.get(key, key)
    if key not in ESTIMATORS:
        raise MVError(f"unknown model family {name!r}; expected one of {FAMILIES}")
    return key


@dataclass(frozen=True)
class HyperGrid:
    """Candidate hyper-parameter values per family.

    Defaults are the full grids. ``with_overrides`` replaces individual
    parameter lists, e.g. ``{"ann": {"hidden_units": [2, 4]}}``.
    """

    grids: Mapping[str, Mapping[str, tuple]] = field(default_factory=lambda: DEFAULT_GRID)

    def __post_init__(self):
        clean = {}
        for fam, params in self.grids.items():
            fam = _family(fam)
            allowed = set(ESTIMATORS[fam]().get_params())
            entry = {}
            for name, values in params.items():
                if name not in allowed:
                    raise MVError(f"{fam} has no hyper-parameter {name!r}")
                values = tuple(values) if isinstance(values, (list, tuple, range)) else (values,)
                if not values:
                    raise MVError(f"empty grid for {fam}.{name}")
                entry[name] = values
            clean[fam] = entry
        object.__setattr__(self, "grids", clean)

    @classmethod
    def default(cls) -> "HyperGrid":
        return cls()

    def with_overrides(self, overrides: Mapping | None) -> "HyperGrid":
        merged = {fam: dict(p) for fam, p in self.grids.items()}
        for fam, params in (overrides or {}).items():
            merged.setdefault(_family(fam), {}).update(params)
        return HyperGrid(merged)

    def points(self, family: str) -> list[dict]:
        params = self.grids.get(_family(family), {})
        names = sorted(params)
        return [dict(zip(names, combo)) for combo in itertools.product(*(params[n] for n in names))]

    def size(self, family: str) -> int:
        return len(self.points(family))

    def as_dict(self) -> dict:
        return {fam: {k: list(v) for k, v in p.items()} for fam, p in self.grids.items()}


def _default_cv_predict(cls, points, X_tr, y_tr, X_val):
    out = []
    for params in points:
        try:
            out.append(cls(**params).fit(X_tr, y_tr).predict(X_val))
        except MVError as exc:
            out.append(exc)
    return out


def _cv_predict(cls, points, X_tr, y_tr, X_val):
    fn = getattr(cls, "cv_predict", None)
    if fn is not None:
        return fn(points, X_tr, y_tr, X_val)
    return _default_cv_predict(cls, points, X_tr, y_tr, X_val)


def fold_slices(n: int, folds: int) -> list[np.ndarray]:
    """Contiguous, near-equal blocks of ``range(n)``."""
    return np.array_split(np.arange(n), folds)


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a grid search on arrays."""

    family: str
    params: dict
    score: float
    estimator: object
    table: tuple[tuple[dict, float | None, str | None], ...]

    @property
    def failures(self) -> list[tuple[dict, str]]:
        return [(p, err) for p, _, err in self.table if err is not None]


def search(family: str, X, y, points: Sequence[dict], folds: int = 10, fixed: Mapping | None = None) -> SearchResult:
    """Score every grid point by mean validation RMSE over ``folds`` blocks.

    The fold blocks are the same for all points. The lowest score wins; exact
    ties go to the simpler configuration. The winner is refit on all rows.
    """
    family = _family(family)
    cls = ESTIMATORS[family]
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if not points:
        raise MVError(f"empty grid for {family}")
    if folds < 2 or n < folds:
        raise InsufficientDataError(f"{n} rows cannot be split into {folds} folds")
    fixed = dict(fixed or {})
    full = [{**p, **fixed} for p in points]
    sq = np.zeros(len(points))
    errors: list[str | None] = [None] * len(points)
    for val in fold_slices(n, folds):
        mask = np.ones(n, dtype=bool)
        mask[val] = False
        preds = _cv_predict(cls, full, X[mask], y[mask], X[val])
        for i, pred in enumerate(preds):
            if errors[i] is not None:
                continue
            if isinstance(pred, Exception):
                errors[i] = f"{type(pred).__name__}: {pred}"
            elif not np.all(np.isfinite(pred)):
                errors[i] = "non-finite validation predictions"
            else:
                sq[i] += math.sqrt(float(np.mean((pred - y[val]) ** 2)))
    scores = [None if errors[i] else sq[i] / folds for i in range(len(points))]
    table = tuple((dict(p), s, e) for p, s, e in zip(points, scores, errors))
    ranked = sorted(
        (i for i in range(len(points)) if scores[i] is not None),
        key=lambda i: (scores[i], cls.complexity(full[i]), i),
    )
    for i in ranked:
        try:
            est = cls(**full[i]).fit(X, y)
        except MVError as exc:
            errors[i] = f"refit failed: {exc}"
            continue
        return SearchResult(family, dict(points[i]), float(scores[i]), est, table)
    detail = "; ".join(f"{p}: {e}" for p, e in zip(points, errors) if e)[:500]
    raise MVError(f"every {family} grid point failed ({detail})")


def fingerprint(matrix: FeatureMatrix) -> dict:
    """Row count and SHA-256 of the training data (timestamps, columns, values)."""
    h = hashlib.sha256()
    h.update("\x1f".join(matrix.columns).encode())
    h.update(np.ascontiguousarray(matrix.index.asi8).tobytes())
    h.update(np.ascontiguousarray(matrix.frame.to_numpy(dtype=float)).tobytes())
    return {"rows": int(matrix.n_rows), "sha256": h.hexdigest()}


@dataclass(frozen=True)
class TrainedModel:
    """A fitted baseline model with everything needed to apply it later.

    ``cv_score`` is the mean validation RMSE in standardised units.
    ``training_ranges`` holds each feature's training minimum and maximum in
    original units, used by the range gate.
    """

    family: str
    frequency: Frequency
    params: dict
    estimator: object
    scaling: ScalingParams
    features: tuple[str, ...]
    target: str
    cv_score: float
    fingerprint: dict
    training_ranges: dict
    n_train: int

    @property
    def label(self) -> str:
        return f"{self.frequency.value}-{self.family}"

    def _standardised(self, matrix: FeatureMatrix) -> np.ndarray:
        if matrix.frequency != self.frequency:
            raise FrequencyError(
                f"model {self.label} expects {self.frequency} data, got {matrix.frequency}"
            )
        missing = [f for f in self.features if f not in matrix.frame.columns]
        if missing:
            raise MVError(f"features absent from the data: {missing}")
        X = matrix.frame[list(self.features)].to_numpy(dtype=float)
        means = np.array([self.scaling[f][0] for f in self.features])
        stds = np.array([self.scaling[f][1] for f in self.features])
        return (X - means) / stds

    def predict(self, matrix: FeatureMatrix) -> np.ndarray:
        """Predictions for every row of ``matrix`` in original units."""
        X = self._standardised(matrix)
        if np.isnan(X).any():
            raise MVError("cannot predict rows with missing feature values")
        return inverse_transform(self.estimator.predict(X), self.scaling, self.target)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "frequency": self.frequency.value,
            "params": dict(self.params),
            "estimator_params": self.estimator.get_params(),
            "state": self.estimator.get_state(),
            "scaling": self.scaling.to_dict(),
            "features": list(self.features),
            "target": self.target,
            "cv_score": self.cv_score,
            "fingerprint": dict(self.fingerprint),
            "training_ranges": {k: list(v) for k, v in self.training_ranges.items()},
            "n_train": self.n_train,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TrainedModel":
        family = _family(data["family"])
        est = ESTIMATORS[family].from_state(data["estimator_params"], data["state"])
        scaling = ScalingParams.from_dict(data["scaling"])
        return cls(
            family=family,
            frequency=Frequency.parse(data["frequency"]),
            params=dict(data["params"]),
            estimator=est,
            scaling=scaling,
            features=tuple(data["features"]),
            target=data["target"],
            cv_score=float(data["cv_score"]),
            fingerprint=dict(data["fingerprint"]),
            training_ranges={k: (float(v[0]), float(v[1])) for k, v in data["training_ranges"].items()},
            n_train=int(data["n_train"]),
        )


def grid_search(
    train: FeatureMatrix,
    family: str,
    grid: HyperGrid | None = None,
    folds: int = 10,
    seed: int = 0,
    scaling: ScalingParams | None = None,
    raw_train: FeatureMatrix | None = None,
) -> TrainedModel:
    """Grid search on a standardised training matrix.

    ``train`` must already be standardised with ``scaling``; ``raw_train``
    (the same rows in original units) supplies the range-gate limits. The
    seed initialises network weights; folds follow the row order.
    """
    family = _family(family)
    grid = grid or HyperGrid()
    if scaling is None:
        raise MVError("grid_search needs the scaling parameters used on the training data")
    if train.frame.isna().to_numpy().any():
        raise MVError("training matrix contains missing values; clean it first")
    fixed = {"random_state": int(seed)} if family == "ann" else {}
    result = search(family, train.X, train.y, grid.points(family), folds=folds, fixed=fixed)
    source = raw_train if raw_train is not None else train
    ranges = {}
    for f in train.features:
        col = source.frame[f].to_numpy(dtype=float)
        if raw_train is None:
            col = inverse_transform(col, scaling, f)
        ranges[f] = (float(col.min()), float(col.max()))
    return TrainedModel(
        family=family,
        frequency=train.frequency,
        params=result.params,
        estimator=result.estimator,
        scaling=scaling,
        features=tuple(train.features),
        target=train.target,
        cv_score=result.score,
        fingerprint=fingerprint(source),
        training_ranges=ranges,
        n_train=train.n_rows,
    )


@dataclass(frozen=True)
class TrainingRun:
    models: tuple[TrainedModel, ...]
    failures: tuple[tuple[str, str, str], ...]


def train_all(
    splits: Sequence[SplitDataset],
    grid: HyperGrid | None = None,
    families: Sequence[str] = FAMILIES,
    folds: int = 10,
    seed: int = 0,
) -> TrainingRun:
    """One model per (family, frequency).

    Scaling parameters are fitted on each training partition and embedded in
    the models. A family that fails on one frequency is recorded in
    ``failures`` without stopping the others.
    """
    grid = grid or HyperGrid()
    families = [_family(f) for f in families]
    models, failures = [], []
    for sp in splits:
        try:
            scaling = fit_scaling(sp.train)
        except MVError as exc:
            failures.extend((sp.frequency.value, fam, str(exc)) for fam in families)
            continue
        std = transform(sp.train, scaling)
        for fam in families:
            try:
                models.append(grid_search(std, fam, grid, folds, seed, scaling, raw_train=sp.train))
            except MVError as exc:
                failures.append((sp.frequency.value, fam, str(exc)))
    return TrainingRun(tuple(models), tuple(failures))
