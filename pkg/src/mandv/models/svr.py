"""Linear epsilon-insensitive support vector regression."""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.svm import LinearSVR

from ..exceptions import FitError, MVError
from .base import BaselineRegressor

EPSILON = 0.1


class SVRRegressor(BaselineRegressor):
    """Minimises ``0.5 ||w||^2 + cost * sum(max(0, |y - w.x - b| - epsilon))``.

    Solved in the dual by liblinear's coordinate descent. The solver treats
    the intercept as an extra feature, so it is lightly regularised too; on
    standardised data the effect is negligible.
    """

    family = "svm"
    _state_attrs = ("coef_", "intercept_")

    def __init__(self, cost=1.0, kernel="linear", epsilon=EPSILON, tol=1e-8, max_iter=5_000_000):
        self.cost = cost
        self.kernel = kernel
        self.epsilon = epsilon
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        if self.kernel != "linear":
            raise MVError(f"only the linear kernel is supported, got {self.kernel!r}")
        if not self.cost > 0:
            raise MVError(f"cost must be positive, got {self.cost}")
        X, y = self._validate_fit(X, y)
        solver = LinearSVR(
            C=float(self.cost),
            epsilon=float(self.epsilon),
            loss="epsilon_insensitive",
            dual=True,
            tol=float(self.tol),
            max_iter=int(self.max_iter),
            random_state=0,
        )
        with warnings.catch_warnings():
            warnings.simplefilter("error", ConvergenceWarning)
            try:
                solver.fit(X, y)
            except ConvergenceWarning as exc:
                raise FitError(f"SVR solver did not converge: {exc}") from exc
        self.coef_ = np.asarray(solver.coef_, dtype=float).ravel()
        self.intercept_ = float(np.ravel(solver.intercept_)[0])
        return self

    def predict(self, X):
        X = self._validate_predict(X)
        return X @ self.coef_ + self.intercept_

    @staticmethod
    def complexity(params):
        return (params.get("cost", 0.0),)
