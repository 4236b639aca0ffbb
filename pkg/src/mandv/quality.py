"""Availability assessment and removal-only cleaning.

Baseline data may only be removed, never replaced by modelled values. The
one sanctioned exception, substituting a consistent missing block with data
from the same calendar period of another year, must be requested explicitly
through :func:`substitute_block` and is logged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from .core import FeatureMatrix
from .exceptions import InsufficientDataError, MVError

logger = logging.getLogger(__name__)

__all__ = [
    "FeatureStats",
    "AvailabilitySummary",
    "assess",
    "omit_poor_features",
    "clean",
    "flag_rows",
    "Substitution",
    "substitute_block",
]

IQR_WHISKER = 1.5


@dataclass(frozen=True)
class FeatureStats:
    id: str
    count: int
    mean: float
    median: float
    unique_count: int
    missing_count: int
    q1: float
    q2: float
    q3: float
    minimum: float
    maximum: float
    lower_fence: float
    upper_fence: float
    outlier_count: int
    poor_quality_fraction: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    def is_outlier(self, values: np.ndarray) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return (values < self.lower_fence) | (values > self.upper_fence)


@dataclass(frozen=True)
class AvailabilitySummary:
    """Summary statistics per feature, relative to ``grid_rows`` grid points."""

    stats: dict
    grid_rows: int
    target: str | None = None

    def __getitem__(self, key: str) -> FeatureStats:
        return self.stats[key]

    def __iter__(self):
        return iter(self.stats.values())

    @property
    def features(self) -> list[str]:
        return list(self.stats)

    def to_rows(self) -> list[dict]:
        rows = []
        for s in self.stats.values():
            rows.append(
                {
                    "id": s.id,
                    "role": "dependent" if s.id == self.target else "feature",
                    "count": s.count,
                    "mean": s.mean,
                    "median": s.median,
                    "unique": s.unique_count,
                    "missing": s.missing_count,
                    "q1": s.q1,
                    "q2": s.q2,
                    "q3": s.q3,
                    "min": s.minimum,
                    "max": s.maximum,
                    "outliers": s.outlier_count,
                    "poor_quality_fraction": s.poor_quality_fraction,
                }
            )
        return rows

    def boxplot_rows(self, matrix: FeatureMatrix) -> list[dict]:
        """Long-format box-plot data: five-number summary plus each outlier."""
        rows = []
        for s in self.stats.values():
            values = matrix.frame[s.id].to_numpy(dtype=float)
            inside = values[~np.isnan(values) & ~s.is_outlier(values)]
            lo_whisker = float(inside.min()) if inside.size else s.q1
            hi_whisker = float(inside.max()) if inside.size else s.q3
            for kind, value in (
                ("whisker_low", lo_whisker),
                ("q1", s.q1),
                ("median", s.q2),
                ("q3", s.q3),
                ("whisker_high", hi_whisker),
            ):
                rows.append({"id": s.id, "kind": kind, "timestamp": "", "value": value})
            mask = s.is_outlier(values)
            for ts, v in zip(matrix.index[mask], values[mask]):
                rows.append(
                    {
                        "id": s.id,
                        "kind": "outlier",
                        "timestamp": ts.strftime("%Y-%m-%dT%H:%M:%SZ"),
                        "value": float(v),
                    }
                )
        return rows


def _feature_stats(name: str, values: np.ndarray, grid_rows: int) -> FeatureStats:
    present = values[~np.isnan(values)]
    if present.size < 4:
        raise InsufficientDataError(
            f"feature {name!r} has {present.size} values; quartiles need at least 4"
        )
    q1, q2, q3 = np.percentile(present, [25, 50, 75], method="linear")
    iqr = q3 - q1
    lo, hi = q1 - IQR_WHISKER * iqr, q3 + IQR_WHISKER * iqr
    outliers = int(((present < lo) | (present > hi)).sum())
    missing = max(grid_rows - present.size, 0)
    return FeatureStats(
        id=name,
        count=int(present.size),
        mean=float(present.mean()),
        median=float(q2),
        unique_count=int(np.unique(present).size),
        missing_count=int(missing),
        q1=float(q1),
        q2=float(q2),
        q3=float(q3),
        minimum=float(present.min()),
        maximum=float(present.max()),
        lower_fence=float(lo),
        upper_fence=float(hi),
        outlier_count=outliers,
        poor_quality_fraction=(missing + outliers) / grid_rows,
    )


def assess(matrix: FeatureMatrix, features=None, include_target: bool = True) -> AvailabilitySummary:
    """Table of summary statistics and box-plot outlier counts per feature.

    Missing counts are taken relative to ``matrix.grid_rows``, so rows that
    were dropped because the dependent variable was absent count as missing
    for every feature.
    """
    features = list(matrix.features if features is None else features)
    if include_target and matrix.target not in features:
        features.append(matrix.target)
    unknown = [f for f in features if f not in matrix.frame.columns]
    if unknown:
        raise MVError(f"features not in matrix: {unknown}")
    grid_rows = int(matrix.grid_rows)
    stats = {
        f: _feature_stats(f, matrix.frame[f].to_numpy(dtype=float), grid_rows) for f in features
    }
    return AvailabilitySummary(stats, grid_rows, matrix.target)


def omit_poor_features(summary: AvailabilitySummary, threshold: float = 0.05) -> list[str]:
    """Features whose poor-quality share strictly exceeds ``threshold``.

    The dependent variable is never returned. Selection should be re-run
    without the returned features.
    """
    return [
        s.id
        for s in summary
        if s.id != summary.target and s.poor_quality_fraction > threshold
    ]


def flag_rows(matrix: FeatureMatrix, summary: AvailabilitySummary) -> np.ndarray:
    """Boolean mask of rows holding a missing value or an outlier.

    Outlier fences come from ``summary``; columns the summary does not cover
    (other than the matrix's own features) are checked for missing values only.
    """
    flags = np.zeros(matrix.n_rows, dtype=bool)
    for col in matrix.columns:
        values = matrix.frame[col].to_numpy(dtype=float)
        flags |= np.isnan(values)
        if col in summary.stats:
            flags |= summary.stats[col].is_outlier(values)
    return flags


def clean(matrix: FeatureMatrix, summary: AvailabilitySummary, max_drop: float = 0.5) -> FeatureMatrix:
    """Drop every row with a missing value or flagged outlier; never impute."""
    flags = flag_rows(matrix, summary)
    dropped = int(flags.sum())
    if matrix.n_rows and dropped / matrix.n_rows > max_drop:
        raise InsufficientDataError(
            f"cleaning would drop {dropped} of {matrix.n_rows} rows "
            f"(> {max_drop:.0%}); the data are insufficient"
        )
    if dropped:
        logger.info("clean: dropped %d of %d rows", dropped, matrix.n_rows)
    return matrix.drop_rows(flags)


@dataclass(frozen=True)
class Substitution:
    """Audit record for the same-period-other-year exception."""

    column: str
    start: pd.Timestamp
    end: pd.Timestamp
    donor_offset: pd.DateOffset
    reason: str
    rows: int = 0


def substitute_block(
    matrix: FeatureMatrix,
    donor: FeatureMatrix,
    column: str,
    start,
    end,
    reason: str,
    years: int = -1,
) -> tuple[FeatureMatrix, Substitution]:
    """Fill a consistent gap in ``column`` with the same calendar period ``years`` away.

    Only cells that are missing inside ``[start, end)`` are filled, and only
    from donor timestamps that exist. Returns the new matrix and the record
    that must be kept with the run.
    """
    start, end = pd.Timestamp(start), pd.Timestamp(end)
    if start.tzinfo is None:
        start, end = start.tz_localize("UTC"), end.tz_localize("UTC")
    if not reason:
        raise MVError("a substitution needs a written justification")
    offset = pd.DateOffset(years=years)
    frame = matrix.frame.copy()
    window = (frame.index >= start) & (frame.index < end)
    gaps = window & frame[column].isna().to_numpy()
    if not gaps.any():
        raise MVError(f"no missing block in {column!r} between {start} and {end}")
    source_times = frame.index[gaps] + offset
    donor_values = donor.frame[column].reindex(source_times).to_numpy()
    filled = ~np.isnan(donor_values)
    target_pos = np.flatnonzero(gaps)[filled]
    frame.iloc[target_pos, frame.columns.get_loc(column)] = donor_values[filled]
    record = Substitution(column, start, end, offset, reason, int(filled.sum()))
    logger.warning(
        "substituted %d cells of %r from %+d year(s): %s", record.rows, column, years, reason
    )
    return replace(matrix, frame=frame), record
