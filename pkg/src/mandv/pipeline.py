"""Baseline and reporting-period workflows built from the individual stages."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import FeatureMatrix, ProjectConfig, RawDataset, align
from .evaluation import ModelScore, evaluate_all, select_best
from .exceptions import MVError, StageError
from .models.search import HyperGrid, TrainedModel, TrainingRun, train_all
from .preprocessing import SplitDataset, aggregate, split
from .quality import AvailabilitySummary, assess, clean, omit_poor_features
from .savings import (
    AdjustmentRecord,
    RangeGateResult,
    SavingsReport,
    adjusted_baseline,
    apply_adjustments,
    gate_range,
    quantify,
)
from .selection import CorrelationReport, FeatureSubset, rank_variables, select_features

__all__ = [
    "SelectionOutcome",
    "BaselineResult",
    "ReportResult",
    "select_with_quality",
    "run_baseline",
    "run_report",
]

TRAIN_RATIO = 0.8


class _stage:
    """Re-raise package errors as :class:`StageError` naming the stage."""

    def __init__(self, name: str, hint: str):
        self.name, self.hint = name, hint

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, MVError) and not isinstance(exc, StageError):
            raise StageError(self.name, str(exc), self.hint) from exc
        return False


@dataclass(frozen=True)
class SelectionOutcome:
    """Feature selection after quality-driven omissions.

    ``rounds`` counts selection passes; each pass after the first ran without
    the features omitted for poor quality.
    """

    report: CorrelationReport
    subset: FeatureSubset
    summary: AvailabilitySummary
    omitted: tuple[str, ...]
    rounds: int


def select_with_quality(matrix: FeatureMatrix, threshold: float = 0.05) -> SelectionOutcome:
    """Select features, drop those with too much poor data, and reselect until stable."""
    omitted: list[str] = []
    rounds = 0
    while True:
        rounds += 1
        candidates = matrix.select([f for f in matrix.features if f not in omitted])
        if not candidates.features:
            raise MVError("every candidate feature was omitted for poor data quality")
        report = rank_variables(candidates)
        subset = select_features(candidates, report=report)
        summary = assess(candidates, subset.selected)
        bad = omit_poor_features(summary, threshold)
        if not bad:
            return SelectionOutcome(report, subset, summary, tuple(omitted), rounds)
        omitted.extend(bad)


@dataclass(frozen=True)
class BaselineResult:
    selection: SelectionOutcome
    cleaned: FeatureMatrix
    splits: tuple[SplitDataset, ...]
    training: TrainingRun
    scores: tuple[ModelScore, ...]
    best: ModelScore

    @property
    def models(self) -> tuple[TrainedModel, ...]:
        return self.training.models

    @property
    def winner(self) -> TrainedModel:
        return self.model_for(self.best)

    def model_for(self, score: ModelScore) -> TrainedModel:
        for m in self.models:
            if m.family == score.family and m.frequency == score.frequency:
                return m
        raise KeyError(score.label)


def run_baseline(
    dataset: RawDataset,
    config: ProjectConfig,
    grid: HyperGrid | None = None,
    folds: int = 10,
) -> BaselineResult:
    """Select, clean, aggregate, split, train, evaluate and pick the best model."""
    with _stage("align", "check the baseline period and the dependent channel"):
        dep = config.check_dataset(dataset)
        raw = align(dataset, config.baseline_period, dep)
    with _stage("select-features", "inspect the correlation report for usable predictors"):
        selection = select_with_quality(raw)
    with _stage("clean", "the baseline period may need more or better data"):
        matrix = raw.select(selection.subset.selected)
        cleaned = clean(matrix, selection.summary)
    with _stage("aggregate", "frequencies must not be finer than the native data"):
        splits = tuple(
            split(aggregate(cleaned, f).matrix, TRAIN_RATIO, config.seed) for f in config.frequencies
        )
    grid = (grid or HyperGrid()).with_overrides(config.grid)
    with _stage("train", "reduce the hyper-parameter grid or check the training data"):
        training = train_all(splits, grid, config.families, folds, config.seed)
        if not training.models:
            raise MVError("no model could be trained: " + "; ".join(e for *_, e in training.failures))
    with _stage("evaluate", "test partitions must match the model frequencies"):
        scores = tuple(evaluate_all(training.models, [s.test for s in splits]))
        best = select_best(scores)
    return BaselineResult(selection, cleaned, splits, training, scores, best)


@dataclass(frozen=True)
class ReportResult:
    reports: tuple[SavingsReport, ...]
    gates: tuple[RangeGateResult, ...]
    winner: SavingsReport

    @property
    def advisories(self) -> tuple[str, ...]:
        return self.winner.advisories


def report_for_model(
    dataset: RawDataset,
    config: ProjectConfig,
    model: TrainedModel,
    score: ModelScore,
    adjustments: Sequence[AdjustmentRecord] = (),
) -> tuple[SavingsReport, RangeGateResult]:
    dep = config.check_dataset(dataset)
    if dep != model.target:
        raise MVError(f"model was trained for {model.target!r}, config names {dep!r}")
    missing = [f for f in model.features if f not in dataset.ids]
    if missing:
        raise MVError(f"reporting features absent: {missing}")
    raw = align(dataset, config.reporting_period, dep).select(model.features)
    incomplete = raw.frame.isna().any(axis=1).to_numpy()
    notes = []
    if incomplete.any():
        notes.append(f"{int(incomplete.sum())} reporting rows with missing values were excluded")
        raw = raw.drop_rows(incomplete)
    matrix = aggregate(raw, model.frequency).matrix
    gate = gate_range(matrix, model.training_ranges)
    base = adjusted_baseline(model, matrix)
    adjusted = apply_adjustments(base, adjustments, config.reporting_period, model.frequency)
    measured = matrix.frame[matrix.target].rename("measured")
    report = quantify(
        measured,
        base,
        score,
        config.confidence_level,
        weights=matrix.counts,
        adjustments=adjustments,
        adjusted=adjusted,
        advisories=tuple(notes) + gate.advisories,
        n_baseline=model.n_train,
    )
    return report, gate


def run_report(
    dataset: RawDataset,
    config: ProjectConfig,
    models: Sequence[TrainedModel],
    scores: Sequence[ModelScore],
    winner: str,
    adjustments: Sequence[AdjustmentRecord] = (),
) -> ReportResult:
    """Savings reports for every model; ``winner`` is the label of the chosen one."""
    by_label = {s.label: s for s in scores}
    reports, gates, chosen = [], [], None
    with _stage("report", "the reporting data must carry the baseline model's features"):
        for model in models:
            if model.label not in by_label:
                raise MVError(f"no test score recorded for model {model.label}")
            rep, gate = report_for_model(dataset, config, model, by_label[model.label], adjustments)
            reports.append(rep)
            gates.append(gate)
            if model.label == winner:
                chosen = rep
        if chosen is None:
            raise MVError(f"winning model {winner!r} is not among the loaded models")
    return ReportResult(tuple(reports), tuple(gates), chosen)
