"""Measurement and verification of energy savings with machine-learned baselines.

The workflow: ingest tagged meter data, select features, assess and clean
the baseline data, aggregate to several measurement frequencies, train and
score baseline models, then quantify reporting-period savings with their
uncertainty.
"""

from .core import (
    FeatureMatrix,
    Frequency,
    Period,
    ProjectConfig,
    RawDataset,
    TaggedChannel,
    Tags,
    align,
    apply_tags,
    ingest_csv,
)
from .evaluation import ModelScore, cv_rmse, evaluate_all, nmbe, required_cvrmse_curve, select_best
from .exceptions import MVError
from .models import HyperGrid, TrainedModel, grid_search, train_all
from .pipeline import run_baseline, run_report
from .preprocessing import ScalingParams, aggregate, split
from .quality import assess, clean, omit_poor_features
from .savings import (
    AdjustmentRecord,
    SavingsReport,
    acceptability_table,
    adjusted_baseline,
    apply_adjustments,
    ashrae_uncertainty,
    gate_range,
    quantify,
)
from .selection import rank_variables, select_features, spearman_rho, vif, vif_screen

__version__ = "0.1.0"

__all__ = [
    "FeatureMatrix",
    "Frequency",
    "Period",
    "ProjectConfig",
    "RawDataset",
    "TaggedChannel",
    "Tags",
    "align",
    "apply_tags",
    "ingest_csv",
    "ModelScore",
    "cv_rmse",
    "evaluate_all",
    "nmbe",
    "required_cvrmse_curve",
    "select_best",
    "MVError",
    "HyperGrid",
    "TrainedModel",
    "grid_search",
    "train_all",
    "run_baseline",
    "run_report",
    "ScalingParams",
    "aggregate",
    "split",
    "assess",
    "clean",
    "omit_poor_features",
    "AdjustmentRecord",
    "SavingsReport",
    "acceptability_table",
    "adjusted_baseline",
    "apply_adjustments",
    "ashrae_uncertainty",
    "gate_range",
    "quantify",
    "rank_variables",
    "select_features",
    "spearman_rho",
    "vif",
    "vif_screen",
]
