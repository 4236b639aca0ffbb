"""Frequency aggregation, shuffled train/test partition and z-score scaling."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, OneToOneFeatureMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .core import FeatureMatrix, Frequency
from .exceptions import FrequencyError, InsufficientDataError, MVError, ZeroVarianceError

__all__ = [
    "FrequencyDataset",
    "SplitDataset",
    "ScalingParams",
    "aggregate",
    "split",
    "train_size",
    "fit_scaling",
    "transform",
    "inverse_transform",
    "ZScoreScaler",
]

# Monday; anchors weekly bins (also a whole number of days/hours from epoch)
BIN_ORIGIN = pd.Timestamp("1970-01-05", tz="UTC")


@dataclass(frozen=True)
class FrequencyDataset:
    frequency: Frequency
    matrix: FeatureMatrix


def bin_starts(index: pd.DatetimeIndex, frequency: Frequency) -> pd.DatetimeIndex:
    """Left-closed interval start for every timestamp."""
    step = Frequency.parse(frequency).duration.value
    offset = (index - BIN_ORIGIN).asi8
    return BIN_ORIGIN + pd.to_timedelta((offset // step) * step, unit="ns")


def aggregate(matrix: FeatureMatrix, frequency) -> FrequencyDataset:
    """Mean of the rows falling in each interval, labelled by interval start.

    Values are weighted by the rows' ``counts`` so, for complete rows, repeated
    aggregation equals aggregating the native data once. Missing cells are
    skipped; intervals
    without any source row do not appear.
    """
    try:
        frequency = Frequency.parse(frequency)
    except FrequencyError:
        raise
    if frequency.duration < matrix.frequency.duration:
        raise FrequencyError(
            f"cannot aggregate {matrix.frequency} data to the finer {frequency}"
        )
    if frequency == matrix.frequency:
        return FrequencyDataset(frequency, matrix.sorted())
    src = matrix.sorted()
    keys = bin_starts(src.index, frequency)
    values = src.frame.to_numpy(dtype=float)
    w = src.counts.astype(float)[:, None]
    present = ~np.isnan(values)
    weighted = np.where(present, values * w, 0.0)
    weights = np.where(present, w, 0.0)
    codes, uniques = pd.factorize(keys, sort=True)
    n_bins = len(uniques)
    sums = np.zeros((n_bins, values.shape[1]))
    wsum = np.zeros((n_bins, values.shape[1]))
    np.add.at(sums, codes, weighted)
    np.add.at(wsum, codes, weights)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(wsum > 0, sums / wsum, np.nan)
    counts = np.bincount(codes, weights=src.counts, minlength=n_bins).astype(np.int64)
    frame = pd.DataFrame(means, index=pd.DatetimeIndex(uniques, name="timestamp"), columns=src.columns)
    out = FeatureMatrix(frame, src.target, frequency, counts=counts, grid_rows=src.grid_rows)
    return FrequencyDataset(frequency, out)


@dataclass(frozen=True)
class SplitDataset:
    """Disjoint train/test partition; ``train`` keeps the shuffled order."""

    train: FeatureMatrix
    test: FeatureMatrix
    seed: int

    @property
    def frequency(self) -> Frequency:
        return self.train.frequency


def train_size(rows: int, ratio: float) -> int:
    """Rows assigned to training: ``ratio * rows`` rounded half up."""
    return int(math.floor(ratio * rows + 0.5))


def split(matrix: FeatureMatrix, ratio: float = 0.8, seed: int = 0) -> SplitDataset:
    """Uniformly shuffled split, deterministic for a given seed."""
    if not 0.0 < ratio < 1.0:
        raise MVError(f"ratio must lie in (0, 1), got {ratio}")
    n = matrix.n_rows
    if n < 10:
        raise InsufficientDataError(f"need at least 10 rows to split, got {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = train_size(n, ratio)
    train = matrix.take(perm[:n_train])
    test = matrix.take(np.sort(perm[n_train:]))
    return SplitDataset(train, test, seed)


@dataclass(frozen=True)
class ScalingParams:
    """Per-column mean and sample standard deviation from the training data."""

    columns: tuple[str, ...]
    means: tuple[float, ...]
    stds: tuple[float, ...]

    def __post_init__(self):
        if not len(self.columns) == len(self.means) == len(self.stds):
            raise MVError("scaling parameters are misaligned")
        for c, s in zip(self.columns, self.stds):
            if not s > 0:
                raise ZeroVarianceError(f"column {c!r} has non-positive std {s}")

    def __getitem__(self, column: str) -> tuple[float, float]:
        try:
            i = self.columns.index(column)
        except ValueError:
            raise MVError(f"no scaling parameters for column {column!r}") from None
        return self.means[i], self.stds[i]

    def __contains__(self, column) -> bool:
        return column in self.columns

    def to_dict(self) -> dict:
        # json writes floats with repr, which round-trips bit-exactly
        return {c: {"mean": m, "std": s} for c, m, s in zip(self.columns, self.means, self.stds)}

    @classmethod
    def from_dict(cls, data: dict) -> "ScalingParams":
        cols = tuple(data)
        return cls(
            cols,
            tuple(float(data[c]["mean"]) for c in cols),
            tuple(float(data[c]["std"]) for c in cols),
        )


def fit_scaling(train: FeatureMatrix) -> ScalingParams:
    values = train.frame.to_numpy(dtype=float)
    if np.isnan(values).any():
        raise MVError("training matrix contains missing values; clean it first")
    if values.shape[0] < 2:
        raise InsufficientDataError("need at least 2 rows to estimate a standard deviation")
    means = values.mean(axis=0)
    stds = values.std(axis=0, ddof=1)
    for col, s in zip(train.columns, stds):
        if not s > 0:
            raise ZeroVarianceError(f"column {col!r} is constant in the training data")
    return ScalingParams(tuple(train.columns), tuple(means.tolist()), tuple(stds.tolist()))


def transform(matrix: FeatureMatrix, params: ScalingParams) -> FeatureMatrix:
    means = np.array([params[c][0] for c in matrix.columns])
    stds = np.array([params[c][1] for c in matrix.columns])
    scaled = (matrix.frame.to_numpy(dtype=float) - means) / stds
    frame = pd.DataFrame(scaled, index=matrix.index, columns=matrix.columns)
    return replace(matrix, frame=frame)


def inverse_transform(values, params: ScalingParams, column: str) -> np.ndarray:
    mean, std = params[column]
    return np.asarray(values, dtype=float) * std + mean


class ZScoreScaler(OneToOneFeatureMixin, TransformerMixin, BaseEstimator):
    """Array-level z-score scaler using the sample (n - 1) standard deviation."""

    def fit(self, X, y=None):
        X = validate_data(self, X, ensure_min_samples=2)
        self.mean_ = X.mean(axis=0)
        self.scale_ = X.std(axis=0, ddof=1)
        if not np.all(self.scale_ > 0):
            raise ZeroVarianceError("constant column")
        return self

    def transform(self, X):
        check_is_fitted(self, "scale_")
        X = validate_data(self, X, reset=False)
        return (X - self.mean_) / self.scale_

    def inverse_transform(self, X):
        check_is_fitted(self, "scale_")
        return np.asarray(X, dtype=float) * self.scale_ + self.mean_
