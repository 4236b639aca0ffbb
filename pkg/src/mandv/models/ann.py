"""Single-hidden-layer feed-forward network for regression."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from ..exceptions import FitError, MVError
from .base import BaselineRegressor


def unpack(theta: np.ndarray, n_in: int, n_hidden: int):
    """Split the flat parameter vector into ``(W, b, v, c)``."""
    a = n_in * n_hidden
    W = theta[:a].reshape(n_in, n_hidden)
    b = theta[a : a + n_hidden]
    v = theta[a + n_hidden : a + 2 * n_hidden]
    c = theta[a + 2 * n_hidden]
    return W, b, v, c


def n_params(n_in: int, n_hidden: int) -> int:
    return n_in * n_hidden + 2 * n_hidden + 1


def forward(theta, X, n_hidden):
    W, b, v, c = unpack(theta, X.shape[1], n_hidden)
    H = expit(X @ W + b)
    return H @ v + c


def objective(theta, X, y, n_hidden, decay):
    """Loss and gradient: ``0.5 * SSE + 0.5 * decay * ||weights||^2``.

    Biases are not decayed. Sigmoid hidden units, linear output.
    """
    W, b, v, c = unpack(theta, X.shape[1], n_hidden)
    H = expit(X @ W + b)
    err = H @ v + c - y
    loss = 0.5 * float(err @ err) + 0.5 * decay * (float(np.sum(W * W)) + float(v @ v))
    dH = np.outer(err, v) * H * (1.0 - H)
    grad = np.concatenate(
        [
            (X.T @ dH + decay * W).ravel(),
            dH.sum(axis=0),
            H.T @ err + decay * v,
            [err.sum()],
        ]
    )
    return loss, grad


class ANNRegressor(BaselineRegressor):
    """One hidden layer of sigmoid units with weight decay.

    Training is full-batch L-BFGS on the summed squared error plus decay and
    stops once every partial derivative is below ``threshold`` in magnitude or
    after ``max_iter`` iterations. Initial weights are uniform in
    ``[-0.5, 0.5]`` drawn from ``random_state``.
    """

    family = "ann"
    _state_attrs = ("theta_",)

    def __init__(self, hidden_units=5, max_iter=1000, threshold=0.01, decay=0.01, random_state=0):
        self.hidden_units = hidden_units
        self.max_iter = max_iter
        self.threshold = threshold
        self.decay = decay
        self.random_state = random_state

    def fit(self, X, y):
        X, y = self._validate_fit(X, y)
        h = int(self.hidden_units)
        if h < 1:
            raise MVError(f"hidden_units must be >= 1, got {self.hidden_units}")
        rng = np.random.default_rng(self.random_state)
        theta0 = rng.uniform(-0.5, 0.5, size=n_params(X.shape[1], h))
        with np.errstate(over="ignore", invalid="ignore"):
            res = minimize(
                objective,
                theta0,
                args=(X, y, h, float(self.decay)),
                jac=True,
                method="L-BFGS-B",
                options={"maxiter": int(self.max_iter), "gtol": float(self.threshold), "ftol": 0.0},
            )
        if not np.isfinite(res.fun) or not np.all(np.isfinite(res.x)):
            raise FitError("network training produced a non-finite loss")
        self.theta_ = res.x
        self.n_iter_ = int(res.nit)
        self.converged_ = bool(np.max(np.abs(res.jac)) < self.threshold)
        return self

    def predict(self, X):
        X = self._validate_predict(X)
        return forward(self.theta_, X, int(self.hidden_units))

    @staticmethod
    def complexity(params):
        return (params.get("hidden_units", 0), -params.get("decay", 0.0))
