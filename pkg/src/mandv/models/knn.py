"""k-nearest-neighbour regression with a triangular kernel."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..exceptions import FitError, MVError
from .base import BaselineRegressor

# extra candidates fetched from the tree so distance ties at the cut-off can
# be resolved by index, exactly like an exhaustive sort would
_TIE_SLACK = 4


def minkowski(diff: np.ndarray, p: float) -> np.ndarray:
    """Minkowski distance of order ``p`` over the last axis."""
    return np.sum(np.abs(diff) ** p, axis=-1) ** (1.0 / p)


def triangular_weights(dist: np.ndarray, k: int) -> np.ndarray:
    """Kernel weights for the ``k`` nearest of each row of sorted distances.

    ``dist`` holds at least ``k`` sorted distances per row; column ``k`` (when
    present) is the (k+1)-th neighbour used as bandwidth. Rows without a
    usable bandwidth (no (k+1)-th neighbour, zero bandwidth or all-zero
    weights) get uniform weights.
    """
    near = dist[:, :k]
    w = np.ones_like(near)
    if dist.shape[1] > k:
        scale = dist[:, k : k + 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            tri = np.clip(1.0 - near / scale, 0.0, None)
        usable = (scale[:, 0] > 0) & (tri.sum(axis=1) > 0)
        w[usable] = tri[usable]
    return w


class KNNRegressor(BaselineRegressor):
    """Kernel-weighted k-NN regression.

    The prediction is ``sum(w_i y_i) / sum(w_i)`` over the ``k`` nearest
    training rows, with Minkowski distance of order ``p`` and triangular
    weights ``1 - d_i / d_(k+1)``.
    """

    family = "knn"
    _state_attrs = ("X_", "y_")

    def __init__(self, k=5, p=2, kernel="triangular"):
        self.k = k
        self.p = p
        self.kernel = kernel

    def _check_params(self):
        if self.kernel != "triangular":
            raise MVError(f"unsupported kernel {self.kernel!r}")
        if int(self.k) != self.k or self.k < 1:
            raise MVError(f"k must be a positive integer, got {self.k}")
        if not 1 <= self.p:
            raise MVError(f"Minkowski order must be >= 1, got {self.p}")

    def fit(self, X, y):
        self._check_params()
        X, y = self._validate_fit(X, y)
        if self.k > X.shape[0]:
            raise FitError(f"k={self.k} exceeds the {X.shape[0]} training rows")
        self.X_ = X.copy()
        self.y_ = y.copy()
        self._after_load()
        return self

    def _after_load(self):
        self.tree_ = cKDTree(self.X_)

    def neighbours(self, X, kmax: int) -> tuple[np.ndarray, np.ndarray]:
        """Sorted distances and indices of the ``kmax + 1`` nearest rows.

        Ordering is by (distance, training index); fewer columns come back
        when the training set is smaller.
        """
        n = self.X_.shape[0]
        want = min(kmax + 1, n)
        kq = min(want + _TIE_SLACK, n)
        _, cand = self.tree_.query(X, k=kq, p=self.p)
        cand = np.asarray(cand).reshape(X.shape[0], kq)
        dist = minkowski(X[:, None, :] - self.X_[cand], self.p)
        order = np.lexsort((cand, dist), axis=1)
        dist = np.take_along_axis(dist, order, axis=1)
        cand = np.take_along_axis(cand, order, axis=1)
        if kq < n:
            # ties may extend past the fetched candidates; sort those rows fully
            suspect = np.flatnonzero(dist[:, want - 1] >= dist[:, kq - 1])
            for r in suspect:
                full = minkowski(X[r] - self.X_, self.p)
                o = np.lexsort((np.arange(n), full))[:kq]
                dist[r], cand[r] = full[o], o
        return dist[:, :want], cand[:, :want]

    def _predict_from(self, dist, idx, k):
        w = triangular_weights(dist, k)
        yk = self.y_[idx[:, :k]]
        return (w * yk).sum(axis=1) / w.sum(axis=1)

    def predict(self, X):
        X = self._validate_predict(X)
        dist, idx = self.neighbours(X, self.k)
        return self._predict_from(dist, idx, self.k)

    def predict_for_ks(self, X, ks) -> dict:
        """Predictions for several ``k`` from a single neighbour query."""
        X = self._validate_predict(X)
        ks = sorted(set(int(k) for k in ks))
        dist, idx = self.neighbours(X, ks[-1])
        return {k: self._predict_from(dist, idx, k) for k in ks}

    @classmethod
    def cv_predict(cls, points, X_tr, y_tr, X_val):
        """Fold predictions for many grid points, sharing neighbour queries."""
        out = [None] * len(points)
        groups: dict = {}
        for i, params in enumerate(points):
            key = tuple(sorted((k, v) for k, v in params.items() if k != "k"))
            groups.setdefault(key, []).append(i)
        for key, members in groups.items():
            base = dict(key)
            ks = [points[i]["k"] for i in members]
            try:
                est = cls(k=max(ks), **base)
                est._check_params()
                X, y = est._validate_fit(X_tr, y_tr)
                est.X_, est.y_ = X.copy(), y.copy()
                est._after_load()
                valid = [k for k in ks if k <= X.shape[0]]
                preds = est.predict_for_ks(X_val, valid) if valid else {}
            except MVError as exc:
                for i in members:
                    out[i] = exc
                continue
            for i in members:
                k = points[i]["k"]
                out[i] = preds.get(k, FitError(f"k={k} exceeds the training rows"))
        return out

    @staticmethod
    def complexity(params):
        return (params.get("k", 0), params.get("p", 0))
