"""Ordinary least squares, with or without an intercept."""

from __future__ import annotations

import numpy as np

from ..exceptions import InsufficientDataError, RankDeficientError
from .base import BaselineRegressor


class OLSRegressor(BaselineRegressor):
    """Least-squares linear model.

    A single input column gives the bi-variable model; more columns the
    multi-variable one. Without an intercept the fit passes through the origin
    of the (standardised) feature space.
    """

    family = "ols"
    _state_attrs = ("coef_", "intercept_")

    def __init__(self, intercept=True):
        self.intercept = intercept

    def fit(self, X, y):
        X, y = self._validate_fit(X, y)
        n, d = X.shape
        cols = d + int(bool(self.intercept))
        if n <= cols:
            raise InsufficientDataError(f"{n} rows cannot determine {cols} coefficients")
        A = np.column_stack([np.ones(n), X]) if self.intercept else X
        if np.linalg.matrix_rank(A) < A.shape[1]:
            raise RankDeficientError("OLS design matrix is rank deficient")
        beta, *_ = np.linalg.lstsq(A, y, rcond=None)
        if self.intercept:
            self.intercept_, self.coef_ = float(beta[0]), beta[1:]
        else:
            self.intercept_, self.coef_ = 0.0, beta
        return self

    def predict(self, X):
        X = self._validate_predict(X)
        return X @ self.coef_ + self.intercept_

    @staticmethod
    def complexity(params):
        return (bool(params.get("intercept", True)),)
