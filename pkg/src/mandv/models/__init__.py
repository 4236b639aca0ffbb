"""Baseline model families and grid search."""

from .ann import ANNRegressor
from .knn import KNNRegressor
from .ols import OLSRegressor
from .persistence import load_model, save_model
from .search import (
    DEFAULT_GRID,
    ESTIMATORS,
    FAMILIES,
    HyperGrid,
    SearchResult,
    TrainedModel,
    TrainingRun,
    grid_search,
    search,
    train_all,
)
from .svr import SVRRegressor

__all__ = [
    "ANNRegressor",
    "KNNRegressor",
    "OLSRegressor",
    "SVRRegressor",
    "DEFAULT_GRID",
    "ESTIMATORS",
    "FAMILIES",
    "HyperGrid",
    "SearchResult",
    "TrainedModel",
    "TrainingRun",
    "grid_search",
    "search",
    "train_all",
    "save_model",
    "load_model",
]
