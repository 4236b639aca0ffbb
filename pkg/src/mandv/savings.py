"""Reporting-period range gate, adjusted baseline, adjustments and savings uncertainty."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
import yaml
from scipy import stats

from .core import FeatureMatrix, Frequency, Period, _to_date
from .evaluation import ModelScore
from .exceptions import MVError
from .models.search import TrainedModel

__all__ = [
    "ADVISORY",
    "FeatureRange",
    "RangeGateResult",
    "gate_range",
    "adjusted_baseline",
    "AdjustmentRecord",
    "load_adjustments",
    "apply_adjustments",
    "t_value",
    "savings_range",
    "is_acceptable",
    "SavingsReport",
    "quantify",
    "ashrae_uncertainty",
    "acceptability_table",
]

ADVISORY = "beyond the range of applicability of the model"


def _lower(tmin: float) -> float:
    return 0.9 * tmin if tmin >= 0 else 1.1 * tmin


def _upper(tmax: float) -> float:
    return 1.1 * tmax if tmax >= 0 else 0.9 * tmax


@dataclass(frozen=True)
class FeatureRange:
    feature: str
    observed_min: float
    observed_max: float
    training_min: float
    training_max: float
    within: bool

    @property
    def bounds(self) -> tuple[float, float]:
        return _lower(self.training_min), _upper(self.training_max)


@dataclass(frozen=True)
class RangeGateResult:
    """Per-feature range verdicts. Violations only add advisories."""

    verdicts: tuple[FeatureRange, ...]
    advisories: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return all(v.within for v in self.verdicts)

    def __getitem__(self, feature: str) -> FeatureRange:
        for v in self.verdicts:
            if v.feature == feature:
                return v
        raise KeyError(feature)


def gate_range(reporting: FeatureMatrix, training) -> RangeGateResult:
    """Check reporting values against 90% of the training minimum and 110% of the maximum.

    ``training`` is a training matrix or a mapping ``feature -> (min, max)``.
    Bounds are inclusive. For negative limits the bound widens by the same 10%
    of magnitude.
    """
    if isinstance(training, FeatureMatrix):
        limits = {
            f: (float(np.nanmin(training.frame[f])), float(np.nanmax(training.frame[f])))
            for f in training.features
        }
    else:
        limits = {f: (float(lo), float(hi)) for f, (lo, hi) in training.items()}
    verdicts, advisories = [], []
    for f, (tmin, tmax) in limits.items():
        if f not in reporting.frame.columns:
            raise MVError(f"reporting data lacks feature {f!r}")
        col = reporting.frame[f].to_numpy(dtype=float)
        col = col[~np.isnan(col)]
        if col.size == 0:
            raise MVError(f"reporting data for {f!r} is entirely missing")
        lo, hi = float(col.min()), float(col.max())
        within = lo >= _lower(tmin) and hi <= _upper(tmax)
        verdicts.append(FeatureRange(f, lo, hi, tmin, tmax, within))
        if not within:
            advisories.append(
                f"{f}: reporting values [{lo:.6g}, {hi:.6g}] fall outside "
                f"[{_lower(tmin):.6g}, {_upper(tmax):.6g}]; results are {ADVISORY}"
            )
    return RangeGateResult(tuple(verdicts), tuple(advisories))


def adjusted_baseline(model: TrainedModel, reporting: FeatureMatrix) -> pd.Series:
    """Model predictions over the reporting rows, in original units."""
    return pd.Series(model.predict(reporting), index=reporting.index, name="adjusted_baseline")


@dataclass(frozen=True)
class AdjustmentRecord:
    """Non-routine adjustment: multiply the baseline by ``factor`` over ``[start, end]``."""

    name: str
    start: date
    end: date
    factor: float
    justification: str = ""
    stakeholders: str = ""

    def __post_init__(self):
        object.__setattr__(self, "start", _to_date(self.start))
        object.__setattr__(self, "end", _to_date(self.end))
        object.__setattr__(self, "factor", float(self.factor))
        if not self.factor > 0 or not math.isfinite(self.factor):
            raise MVError(f"adjustment {self.name!r} has non-positive factor {self.factor}")
        if self.end < self.start:
            raise MVError(f"adjustment {self.name!r} ends before it starts")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "AdjustmentRecord":
        return cls(
            name=str(data["name"]),
            start=data["start"],
            end=data["end"],
            factor=data["factor"],
            justification=str(data.get("justification", "")),
            stakeholders=str(data.get("stakeholders", "")),
        )

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "start": self.start.isoformat(),
            "end": self.end.isoformat(),
            "factor": self.factor,
            "justification": self.justification,
            "stakeholders": self.stakeholders,
        }

    def audit_line(self) -> str:
        return (
            f"{self.name}: baseline x {self.factor!r} from {self.start} to {self.end}"
            f" ({self.justification or 'no justification given'};"
            f" agreed by {self.stakeholders or 'unspecified'})"
        )

    def mask(self, index: pd.DatetimeIndex, duration: pd.Timedelta | None = None) -> np.ndarray:
        """Rows whose interval ``[t, t + duration)`` overlaps the record's dates."""
        lo, hi = Period(self.start, self.end).bounds
        if duration is None:
            return np.asarray((index >= lo) & (index < hi))
        return np.asarray((index + duration > lo) & (index < hi))


def load_adjustments(path) -> list[AdjustmentRecord]:
    """Read a YAML list of adjustment records (or ``{adjustments: [...]}``)."""
    data = yaml.safe_load(Path(path).read_text()) or []
    if isinstance(data, Mapping):
        data = data.get("adjustments", [])
    return [AdjustmentRecord.from_mapping(d) for d in data]


def apply_adjustments(
    baseline: pd.Series,
    adjustments: Sequence[AdjustmentRecord],
    period: Period | None = None,
    frequency=None,
) -> pd.Series:
    """Scale the baseline inside each record's interval; overlaps multiply.

    When ``period`` is given every record must lie inside it. With a
    ``frequency`` each timestamp stands for the interval it starts, and any
    overlap with the record's dates counts.
    """
    duration = Frequency.parse(frequency).duration if frequency is not None else None
    out = baseline.to_numpy(dtype=float).copy()
    for rec in adjustments:
        if period is not None and not (period.start <= rec.start and rec.end <= period.end):
            raise MVError(f"adjustment {rec.name!r} extends outside the reporting period")
        out[rec.mask(baseline.index, duration)] *= rec.factor
    return pd.Series(out, index=baseline.index, name=baseline.name)


def t_value(confidence: float, df: float) -> float:
    """Two-sided Student t quantile."""
    if not 0.0 < confidence < 1.0:
        raise MVError(f"confidence must lie in (0, 1), got {confidence}")
    if not df >= 1:
        raise MVError(f"degrees of freedom must be >= 1, got {df}")
    return float(stats.t.ppf(0.5 + confidence / 2.0, df))


def savings_range(savings: float, se: float, confidence: float, df: float) -> tuple[float, float, float]:
    """``(low, high, t)`` with ``low/high = savings -/+ t * se``."""
    t = t_value(confidence, df)
    u = t * se
    return savings - u, savings + u, t


def is_acceptable(savings: float, se: float) -> bool:
    """Savings are acceptable when they exceed twice the standard error."""
    return bool(savings > 2.0 * se)


def ashrae_uncertainty(cv_rmse_pct: float, F: float, n: int, m: int, t: float) -> float:
    """Fractional-savings uncertainty ``t * 1.26 * (CV / F) * sqrt((n + 2) / (n m))``.

    ``cv_rmse_pct`` is in percent; the result is a fraction of the savings.
    For comparison only.
    """
    if F == 0:
        raise MVError("fractional savings F must be non-zero")
    if n <= 0 or m <= 0:
        raise MVError("n and m must be positive")
    return t * 1.26 * (cv_rmse_pct / 100.0 / F) * math.sqrt((n + 2) / (n * m))


@dataclass(frozen=True)
class SavingsReport:
    """Savings over the reporting period with their uncertainty.

    ``se`` is the model's test RMSE per interval. ``se_total`` expresses it
    over the reporting total as ``se * sum(weights)``, treating interval
    errors as fully correlated; ``weights`` count native rows per interval.
    """

    family: str
    frequency: str
    timestamps: tuple
    measured: tuple[float, ...]
    baseline: tuple[float, ...]
    adjusted_baseline: tuple[float, ...]
    weights: tuple[int, ...]
    total_savings: float
    se: float
    se_total: float
    n_test: int
    df: int
    t_value: float
    uncertainty: float
    range_low: float
    range_high: float
    confidence: float
    acceptable: bool
    fractional_savings: float
    ashrae_uncertainty: float | None
    adjustments: tuple[str, ...] = ()
    advisories: tuple[str, ...] = ()
    notes: tuple[str, ...] = field(default=())

    @property
    def label(self) -> str:
        return f"{self.frequency}-{self.family}"

    def summary(self) -> dict:
        return {
            "family": self.family,
            "frequency": self.frequency,
            "intervals": len(self.measured),
            "total_savings": self.total_savings,
            "se": self.se,
            "se_total": self.se_total,
            "n_test": self.n_test,
            "df": self.df,
            "t_value": self.t_value,
            "uncertainty": self.uncertainty,
            "range_low": self.range_low,
            "range_high": self.range_high,
            "confidence": self.confidence,
            "acceptable": self.acceptable,
            "fractional_savings": self.fractional_savings,
            "ashrae_uncertainty": self.ashrae_uncertainty,
            "adjustments": list(self.adjustments),
            "advisories": list(self.advisories),
            "notes": list(self.notes),
        }

    def write_series(self, path) -> Path:
        """Measured vs adjusted baseline per interval (time-series plot data)."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["timestamp", "measured", "baseline", "adjusted_baseline", "weight"])
            for row in zip(self.timestamps, self.measured, self.baseline, self.adjusted_baseline, self.weights):
                ts, vals, wt = row[0], row[1:4], row[4]
                w.writerow([ts, *(repr(float(v)) for v in vals), wt])
        return path


def quantify(
    measured,
    baseline,
    score: ModelScore,
    confidence: float = 0.68,
    weights=None,
    adjustments: Sequence[AdjustmentRecord] = (),
    adjusted=None,
    advisories: Sequence[str] = (),
    n_baseline: int | None = None,
) -> SavingsReport:
    """Total savings, uncertainty range and acceptability.

    ``baseline`` is the adjusted baseline actually compared with ``measured``
    (after any adjustments); ``adjusted`` optionally carries it when
    ``baseline`` is the unadjusted prediction. Savings are
    ``sum(w * (baseline - measured))``; t uses ``n_test - 1`` degrees of
    freedom.
    """
    idx = None
    if isinstance(measured, pd.Series) and isinstance(baseline, pd.Series):
        if not measured.index.equals(baseline.index):
            raise MVError("measured and baseline series are not aligned")
        idx = measured.index
    y = np.asarray(measured, dtype=float).ravel()
    b0 = np.asarray(baseline, dtype=float).ravel()
    b = b0 if adjusted is None else np.asarray(adjusted, dtype=float).ravel()
    if not (y.shape == b0.shape == b.shape):
        raise MVError("measured and baseline series have different lengths")
    if y.size == 0:
        raise MVError("no reporting intervals")
    if np.isnan(y).any() or np.isnan(b).any():
        raise MVError("measured or baseline series contains missing values")
    w = np.ones(y.size, dtype=np.int64) if weights is None else np.asarray(weights, dtype=np.int64).ravel()
    if w.shape != y.shape or np.any(w < 1):
        raise MVError("weights must be positive, one per interval")
    total = float(np.sum(w * (b - y)))
    se_total = float(score.rmse_abs * np.sum(w))
    df = max(int(score.n_test) - 1, 1)
    low, high, t = savings_range(total, se_total, confidence, df)
    base_total = float(np.sum(w * b))
    F = total / base_total if base_total != 0 else float("nan")
    ashrae = None
    if n_baseline and F > 0:
        ashrae = ashrae_uncertainty(score.cv_rmse_pct, F, int(n_baseline), int(y.size), t)
    stamps = tuple(
        (ts.strftime("%Y-%m-%dT%H:%M:%SZ") for ts in idx) if idx is not None else range(y.size)
    )
    return SavingsReport(
        family=score.family,
        frequency=score.frequency.value,
        timestamps=stamps,
        measured=tuple(y.tolist()),
        baseline=tuple(b0.tolist()),
        adjusted_baseline=tuple(b.tolist()),
        weights=tuple(int(v) for v in w),
        total_savings=total,
        se=float(score.rmse_abs),
        se_total=se_total,
        n_test=int(score.n_test),
        df=df,
        t_value=t,
        uncertainty=high - total,
        range_low=low,
        range_high=high,
        confidence=float(confidence),
        acceptable=is_acceptable(total, se_total),
        fractional_savings=F,
        ashrae_uncertainty=ashrae,
        adjustments=tuple(a.audit_line() for a in adjustments),
        advisories=tuple(advisories),
        notes=(
            "se_total = se x native rows in the reporting period "
            "(interval errors treated as fully correlated)",
        ),
    )


def _row(item) -> dict:
    if isinstance(item, SavingsReport):
        return {
            "frequency": item.frequency,
            "family": item.family,
            "savings": item.total_savings,
            "se": item.se_total,
        }
    return {k: item[k] for k in ("frequency", "family", "savings", "se")}


def acceptability_table(reports) -> list[dict]:
    """Rows ``(frequency, family, savings, se, acceptable)``; acceptable is "Yes"/"No".

    Accepts savings reports or mappings with ``frequency``, ``family``,
    ``savings`` and ``se`` keys.
    """
    rows = []
    for item in reports:
        r = _row(item)
        r["acceptable"] = "Yes" if is_acceptable(float(r["savings"]), float(r["se"])) else "No"
        rows.append(r)
    return rows


def write_table(rows: Sequence[Mapping], path, fields: Sequence[str]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return path


def range_rows(reports: Sequence[SavingsReport]) -> list[dict]:
    """Per-model savings with uncertainty bounds (error-bar plot data)."""
    return [
        {
            "frequency": r.frequency,
            "family": r.family,
            "total_savings": r.total_savings,
            "range_low": r.range_low,
            "range_high": r.range_high,
            "se_total": r.se_total,
            "acceptable": "Yes" if r.acceptable else "No",
        }
        for r in reports
    ]
