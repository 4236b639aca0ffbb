"""Spearman-ranked greedy feature selection with a VIF screen.

Candidates are ordered by the absolute Spearman correlation with the
dependent variable. Walking that order, a candidate joins the subset only if
the adjusted R^2 of an OLS fit on the enlarged subset improves by more than
``min_improvement``. Afterwards features are dropped worst-VIF-first until
every VIF is at most ``vif_limit``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .core import FeatureMatrix
from .exceptions import InsufficientDataError, MVError, RankDeficientError, ZeroVarianceError

__all__ = [
    "spearman_rho",
    "CorrelationEntry",
    "CorrelationReport",
    "FeatureSubset",
    "rank_variables",
    "adjusted_r2",
    "fit_ols_adjusted_r2",
    "vif",
    "vif_screen",
    "select_features",
    "SpearmanR2Selector",
]


def spearman_rho(x, y) -> float:
    """Spearman rank correlation; tied values receive average ranks.

    With all ranks distinct the closed form ``1 - 6 sum(d^2) / (m (m^2 - 1))``
    is used, otherwise the Pearson correlation of the rank vectors.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1:
        raise MVError("spearman_rho expects 1-D vectors")
    if x.size != y.size:
        raise MVError(f"length mismatch: {x.size} != {y.size}")
    m = x.size
    if m < 3:
        raise InsufficientDataError("need at least 3 paired observations")
    if np.isnan(x).any() or np.isnan(y).any():
        raise MVError("spearman_rho does not accept missing values")
    rx = rankdata(x)
    ry = rankdata(y)
    if np.ptp(rx) == 0 or np.ptp(ry) == 0:
        raise ZeroVarianceError("correlation undefined for a constant vector")
    distinct = np.unique(x).size == m and np.unique(y).size == m
    if distinct:
        d = rx - ry
        return float(1.0 - 6.0 * np.dot(d, d) / (m * (m * m - 1.0)))
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    return float(np.dot(rx, ry) / math.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


@dataclass(frozen=True)
class CorrelationEntry:
    id: str
    rho: float | None
    n: int
    reason: str | None = None

    @property
    def excluded(self) -> bool:
        return self.rho is None


@dataclass(frozen=True)
class CorrelationReport:
    """Per-predictor Spearman correlations, ordered by decreasing ``|rho|``."""

    target: str
    entries: tuple[CorrelationEntry, ...]

    @property
    def ordering(self) -> list[str]:
        return [e.id for e in self.entries if not e.excluded]

    @property
    def excluded(self) -> list[CorrelationEntry]:
        return [e for e in self.entries if e.excluded]

    def __getitem__(self, key: str) -> CorrelationEntry:
        for e in self.entries:
            if e.id == key:
                return e
        raise KeyError(key)

    def __len__(self) -> int:
        return len(self.entries)

    def to_rows(self) -> list[dict]:
        rows = []
        for rank, e in enumerate(self.entries, start=1):
            rows.append(
                {
                    "rank": "" if e.excluded else rank,
                    "id": e.id,
                    "rho": "" if e.rho is None else repr(e.rho),
                    "n": e.n,
                    "excluded": e.reason or "",
                }
            )
        return rows


def rank_variables(matrix: FeatureMatrix) -> CorrelationReport:
    """Spearman correlation of every predictor with the dependent variable.

    Each pair uses the rows where both values are present. Constant or
    too-sparse predictors are kept in the report as excluded entries.
    """
    if len(matrix.columns) < 2:
        raise MVError("need at least one predictor and the dependent variable")
    y = matrix.y
    ranked, excluded = [], []
    for pos, col in enumerate(matrix.features):
        x = matrix.frame[col].to_numpy(dtype=float)
        ok = ~(np.isnan(x) | np.isnan(y))
        n = int(ok.sum())
        try:
            rho = spearman_rho(x[ok], y[ok])
        except ZeroVarianceError:
            excluded.append(CorrelationEntry(col, None, n, "zero variance"))
            continue
        except InsufficientDataError:
            excluded.append(CorrelationEntry(col, None, n, "fewer than 3 observations"))
            continue
        ranked.append((pos, CorrelationEntry(col, rho, n)))
    # stable: equal |rho| keeps column order
    ranked.sort(key=lambda item: (-abs(item[1].rho), item[0]))
    return CorrelationReport(matrix.target, tuple(e for _, e in ranked) + tuple(excluded))


def _design(X: np.ndarray, intercept: bool = True) -> np.ndarray:
    if intercept:
        return np.column_stack([np.ones(X.shape[0]), X])
    return X


def _r2(X: np.ndarray, y: np.ndarray) -> float:
    """R^2 of an OLS fit with intercept; raises on rank deficiency."""
    A = _design(X)
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise RankDeficientError("design matrix is rank deficient")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dev = y - y.mean()
    sst = float(dev @ dev)
    if sst == 0.0:
        raise ZeroVarianceError("dependent variable is constant")
    return 1.0 - float(resid @ resid) / sst


def adjusted_r2(r2: float, m: int, k: int) -> float:
    return 1.0 - (1.0 - r2) * (m - 1) / (m - k - 1)


def _complete(matrix: FeatureMatrix, features) -> tuple[np.ndarray, np.ndarray]:
    X = matrix.frame[list(features)].to_numpy(dtype=float)
    y = matrix.y
    ok = ~(np.isnan(X).any(axis=1) | np.isnan(y))
    return X[ok], y[ok]


def fit_ols_adjusted_r2(matrix: FeatureMatrix, features) -> float:
    """Adjusted R^2 of the OLS fit (with intercept) of the dependent on ``features``.

    Rows with a missing value in any involved column are left out.
    """
    features = list(features)
    if not features:
        raise MVError("at least one feature is required")
    X, y = _complete(matrix, features)
    m, k = X.shape
    if m < k + 2:
        raise InsufficientDataError(f"{m} complete rows cannot support {k} features")
    return adjusted_r2(_r2(X, y), m, k)


def _vif_array(X: np.ndarray) -> np.ndarray:
    k = X.shape[1]
    out = np.empty(k)
    for j in range(k):
        others = np.delete(X, j, axis=1)
        try:
            r2 = _r2(others, X[:, j])
        except ZeroVarianceError:
            out[j] = math.inf
            continue
        except RankDeficientError:
            # the remaining columns are collinear among themselves; fall back
            # to a minimum-norm fit, which still gives the right R^2
            A = _design(others)
            coef, *_ = np.linalg.lstsq(A, X[:, j], rcond=None)
            resid = X[:, j] - A @ coef
            dev = X[:, j] - X[:, j].mean()
            r2 = 1.0 - float(resid @ resid) / float(dev @ dev)
        out[j] = math.inf if r2 >= 1.0 - 1e-12 else 1.0 / (1.0 - r2)
    return out


def vif(matrix: FeatureMatrix, features) -> dict[str, float]:
    """Variance inflation factor ``1 / (1 - R_j^2)`` for each feature.

    Perfect collinearity is reported as ``math.inf``.
    """
    features = list(features)
    if len(features) < 2:
        raise MVError("VIF needs at least 2 features")
    X, _ = _complete(matrix, features)
    if X.shape[0] < len(features) + 1:
        raise InsufficientDataError("too few complete rows for VIF")
    return dict(zip(features, _vif_array(X).tolist()))


@dataclass(frozen=True)
class FeatureSubset:
    """Outcome of feature selection.

    ``history`` lists ``(feature, adjusted_r2)`` for every acceptance of the
    greedy pass; ``removed_by_vif`` records what the VIF screen dropped.
    """

    selected: tuple[str, ...]
    adjusted_r2: float
    vif: dict = field(default_factory=dict)
    history: tuple[tuple[str, float], ...] = ()
    removed_by_vif: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.selected)

    def to_dict(self) -> dict:
        return {
            "selected": list(self.selected),
            "adjusted_r2": self.adjusted_r2,
            "vif": {k: (None if math.isinf(v) else v) for k, v in self.vif.items()},
            "history": [[f, r] for f, r in self.history],
            "removed_by_vif": list(self.removed_by_vif),
        }


def vif_screen(subset: FeatureSubset, matrix: FeatureMatrix, limit: float = 5.0) -> FeatureSubset:
    """Drop the worst-VIF feature until every VIF is at most ``limit``.

    On equal VIF the later (lower ranked) feature goes first.
    """
    selected = list(subset.selected)
    if not selected:
        raise MVError("cannot screen an empty subset")
    removed = list(subset.removed_by_vif)
    while len(selected) > 1:
        values = vif(matrix, selected)
        worst = max(range(len(selected)), key=lambda i: (values[selected[i]], i))
        if values[selected[worst]] <= limit:
            break
        removed.append(selected.pop(worst))
    final_vif = vif(matrix, selected) if len(selected) > 1 else {selected[0]: 1.0}
    return FeatureSubset(
        tuple(selected),
        fit_ols_adjusted_r2(matrix, selected),
        final_vif,
        subset.history,
        tuple(removed),
    )


def select_features(
    matrix: FeatureMatrix,
    min_improvement: float = 0.01,
    vif_limit: float = 5.0,
    report: CorrelationReport | None = None,
) -> FeatureSubset:
    """Rank predictors, grow the subset greedily, then apply the VIF screen."""
    report = report or rank_variables(matrix)
    order = report.ordering
    if not order:
        raise MVError("no predictor has a defined correlation with the dependent variable")
    selected: list[str] = []
    current = None
    history = []
    for cand in order:
        try:
            score = fit_ols_adjusted_r2(matrix, selected + [cand])
        except (RankDeficientError, InsufficientDataError, ZeroVarianceError):
            continue
        if current is None or score - current > min_improvement:
            selected.append(cand)
            current = score
            history.append((cand, score))
    if not selected:
        raise MVError("no predictor yields a fittable model")
    greedy = FeatureSubset(tuple(selected), current, {}, tuple(history))
    return vif_screen(greedy, matrix, vif_limit)


class SpearmanR2Selector(SelectorMixin, BaseEstimator):
    """Array-level wrapper exposing the selection as a scikit-learn selector.

    Parameters
    ----------
    min_improvement : float, default=0.01
        Adjusted R^2 gain a candidate must exceed to be accepted.
    vif_limit : float, default=5.0
        Largest VIF tolerated in the final subset.
    """

    def __init__(self, min_improvement=0.01, vif_limit=5.0):
        self.min_improvement = min_improvement
        self.vif_limit = vif_limit

    def fit(self, X, y):
        import pandas as pd

        X, y = validate_data(self, X, y, ensure_min_samples=3, y_numeric=True)
        names = [f"x{i}" for i in range(X.shape[1])]
        idx = pd.date_range("2000-01-01", periods=X.shape[0], freq="15min", tz="UTC")
        frame = pd.DataFrame(X, columns=names, index=idx)
        frame["__y__"] = y
        fm = FeatureMatrix(frame, "__y__", "15min")
        self.subset_ = select_features(fm, self.min_improvement, self.vif_limit)
        pos = {n: i for i, n in enumerate(names)}
        self.support_ = np.zeros(X.shape[1], dtype=bool)
        self.support_[[pos[s] for s in self.subset_.selected]] = True
        self.adjusted_r2_ = self.subset_.adjusted_r2
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        return self.support_
