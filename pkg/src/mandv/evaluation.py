"""Test-set metrics, model ranking and the savings performance requirement."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import FeatureMatrix, Frequency
from .exceptions import FrequencyError, MVError
from .models.search import FAMILIES, TrainedModel

__all__ = [
    "rmse",
    "cv_rmse",
    "nmbe",
    "ModelScore",
    "score_model",
    "evaluate_all",
    "select_best",
    "CurvePoint",
    "required_cvrmse_curve",
    "write_score_table",
]


def _pair(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=float).ravel()
    p = np.asarray(predicted, dtype=float).ravel()
    if a.shape != p.shape:
        raise MVError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size == 0:
        raise MVError("metrics need at least one observation")
    return a, p


def _mean_actual(a: np.ndarray) -> float:
    mean = float(np.mean(a))
    if mean == 0.0:
        raise MVError("mean of actual values is zero; normalised metrics are undefined")
    return mean


def rmse(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    return math.sqrt(float(np.mean((a - p) ** 2)))


def cv_rmse(actual, predicted) -> float:
    """Coefficient of variation of the RMSE, in percent (denominator ``n``)."""
    a, p = _pair(actual, predicted)
    return 100.0 * rmse(a, p) / _mean_actual(a)


def nmbe(actual, predicted) -> float:
    """Normalised mean bias error in percent; positive means under-prediction."""
    a, p = _pair(actual, predicted)
    return 100.0 * float(np.mean(a - p)) / _mean_actual(a)


@dataclass(frozen=True)
class ModelScore:
    """Held-out performance of one model in original units.

    ``rmse_abs`` is the standard error used for savings uncertainty.
    """

    family: str
    frequency: Frequency
    params: dict
    cv_rmse_pct: float
    nmbe_pct: float
    rmse_abs: float
    n_test: int
    mean_actual: float

    @property
    def label(self) -> str:
        return f"{self.frequency.value}-{self.family}"

    def as_row(self) -> dict:
        return {
            "frequency": self.frequency.value,
            "family": self.family,
            "params": " ".join(f"{k}={v}" for k, v in sorted(self.params.items())),
            "cv_rmse_pct": self.cv_rmse_pct,
            "nmbe_pct": self.nmbe_pct,
            "rmse_abs": self.rmse_abs,
            "n_test": self.n_test,
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["frequency"] = self.frequency.value
        return d

    @classmethod
    def from_dict(cls, data: Mapping) -> "ModelScore":
        return cls(**{**data, "frequency": Frequency.parse(data["frequency"])})


def score_model(model: TrainedModel, test: FeatureMatrix) -> ModelScore:
    """Score ``model`` on a test matrix given in original units."""
    if test.frequency != model.frequency:
        raise FrequencyError(
            f"model {model.label} is {model.frequency} but the test data is {test.frequency}"
        )
    actual = test.y
    predicted = model.predict(test)
    return ModelScore(
        family=model.family,
        frequency=model.frequency,
        params=dict(model.params),
        cv_rmse_pct=cv_rmse(actual, predicted),
        nmbe_pct=nmbe(actual, predicted),
        rmse_abs=rmse(actual, predicted),
        n_test=int(actual.size),
        mean_actual=float(np.mean(actual)),
    )


def evaluate_all(models: Sequence[TrainedModel], tests) -> list[ModelScore]:
    """One score per model against the test matrix of its frequency.

    ``tests`` is a mapping from frequency to matrix or a sequence of matrices.
    """
    if isinstance(tests, Mapping):
        by_freq = {Frequency.parse(k): v for k, v in tests.items()}
    else:
        by_freq = {m.frequency: m for m in tests}
    scores = []
    for model in models:
        if model.frequency not in by_freq:
            raise FrequencyError(f"no {model.frequency} test data for model {model.label}")
        scores.append(score_model(model, by_freq[model.frequency]))
    return scores


def _selection_key(score: ModelScore) -> tuple:
    family_rank = FAMILIES.index(score.family) if score.family in FAMILIES else len(FAMILIES)
    return (score.cv_rmse_pct, -score.frequency.duration.value, family_rank)


def select_best(scores: Sequence[ModelScore]) -> ModelScore:
    """Lowest CV(RMSE); ties go to the coarser frequency, then OLS, kNN, ANN, SVM.

    NMBE plays no part in the choice.
    """
    if not scores:
        raise MVError("no scores to choose from")
    return min(scores, key=_selection_key)


@dataclass(frozen=True)
class CurvePoint:
    fraction: float
    cv_rmse_max_pct: float
    cv_rmse_max_ashrae_pct: float | None


def required_cvrmse_curve(fractions, t: float, n: int | None = None, m: int | None = None) -> list[CurvePoint]:
    """Largest CV(RMSE) that still leaves savings acceptable, per fractional saving.

    With savings ``F * ybar * m`` and uncertainty ``t * CV * ybar * m`` (per
    interval errors taken as fully correlated over the reporting total), the
    savings exceed twice the uncertainty iff ``CV < F / (2 t)``. When ``n``
    and ``m`` are given, the same half-of-savings requirement is also solved
    for the fractional-savings uncertainty formula with its 1.26 coefficient.
    """
    if not t > 0:
        raise MVError("t must be positive")
    fractions = np.asarray(fractions, dtype=float)
    if np.any(fractions <= 0) or np.any(fractions > 1):
        raise MVError("fractional savings must lie in (0, 1]")
    ashrae = n is not None and m is not None
    if ashrae and (n <= 0 or m <= 0):
        raise MVError("n and m must be positive")
    out = []
    for F in fractions.tolist():
        ipmvp = 100.0 * F / (2.0 * t)
        alt = 100.0 * 0.5 * F / (1.26 * t * math.sqrt((n + 2) / (n * m))) if ashrae else None
        out.append(CurvePoint(F, ipmvp, alt))
    return out


def write_score_table(scores: Sequence[ModelScore], path) -> Path:
    """CSV with one row per model, ordered by frequency then family."""
    path = Path(path)
    rows = sorted(
        (s.as_row() for s in scores),
        key=lambda r: (Frequency.parse(r["frequency"]).duration, FAMILIES.index(r["family"])),
    )
    fields = ["frequency", "family", "params", "cv_rmse_pct", "nmbe_pct", "rmse_abs", "n_test"]
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return path
