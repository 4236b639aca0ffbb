"""Shared pieces of the baseline-model estimators."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data


class BaselineRegressor(RegressorMixin, BaseEstimator):
    """scikit-learn regressor with an explicit, serialisable fitted state.

    Subclasses list their fitted attributes in ``_state_attrs``; ``get_state``
    and ``from_state`` move them to and from plain JSON-friendly values so a
    reloaded model predicts bit-identically.
    """

    family: str = ""
    _state_attrs: tuple[str, ...] = ()

    def _validate_fit(self, X, y):
        return validate_data(self, X, y, y_numeric=True, dtype=np.float64)

    def _validate_predict(self, X):
        check_is_fitted(self, self._state_attrs[0])
        return validate_data(self, X, reset=False, dtype=np.float64)

    def get_state(self) -> dict:
        check_is_fitted(self, self._state_attrs[0])
        state = {}
        for name in self._state_attrs:
            value = getattr(self, name)
            state[name] = value.tolist() if isinstance(value, np.ndarray) else value
        state["n_features_in_"] = int(self.n_features_in_)
        return state

    @classmethod
    def from_state(cls, params: dict, state: dict):
        est = cls(**params)
        for name in cls._state_attrs:
            value = state[name]
            setattr(est, name, np.asarray(value, dtype=float) if isinstance(value, list) else value)
        est.n_features_in_ = int(state["n_features_in_"])
        est._after_load()
        return est

    def _after_load(self):
        pass

    @staticmethod
    def complexity(params: dict) -> tuple:
        """Sort key used to break exact CV ties; smaller means simpler."""
        return ()
