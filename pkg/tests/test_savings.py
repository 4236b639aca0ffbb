from __future__ import annotations

from datetime import date

import numpy as np
import pandas as pd
import pytest
from scipy import stats

from conftest import make_matrix
from mandv.core import Frequency, Period
from mandv.evaluation import ModelScore
from mandv.exceptions import MVError
from mandv.savings import (
    ADVISORY,
    AdjustmentRecord,
    acceptability_table,
    apply_adjustments,
    ashrae_uncertainty,
    gate_range,
    is_acceptable,
    load_adjustments,
    quantify,
    savings_range,
    t_value,
)


def _score(rmse_abs=2.0, n_test=41, cv=5.0, family="ols", freq="hourly"):
    return ModelScore(family, Frequency.parse(freq), {}, cv, 0.0, rmse_abs, n_test, 40.0)


def test_acceptability_is_strict():
    assert is_acceptable(2.0001, 1.0)
    assert not is_acceptable(2.0, 1.0)
    assert not is_acceptable(-5.0, 1.0)


def test_t_value_matches_scipy():
    assert t_value(0.68, 30) == pytest.approx(stats.t.ppf(0.84, 30), rel=1e-15)
    assert t_value(0.95, 1e9) == pytest.approx(1.959964, abs=1e-6)
    with pytest.raises(MVError):
        t_value(1.0, 10)
    with pytest.raises(MVError):
        t_value(0.68, 0)


def test_savings_range_is_symmetric():
    low, high, t = savings_range(100.0, 10.0, 0.9, 20)
    assert high - 100.0 == pytest.approx(100.0 - low) == pytest.approx(10.0 * t)


def test_quantify_totals_by_hand():
    idx = pd.date_range("2017-01-02", periods=3, freq="h", tz="UTC")
    measured = pd.Series([10.0, 11.0, 9.0], index=idx)
    baseline = pd.Series([12.0, 12.0, 12.0], index=idx)
    rep = quantify(measured, baseline, _score(), 0.68, weights=[4, 4, 2])
    assert rep.total_savings == 4 * 2 + 4 * 1 + 2 * 3
    assert rep.se_total == 2.0 * 10
    assert rep.df == 40
    assert rep.range_high - rep.total_savings == pytest.approx(t_value(0.68, 40) * 20.0)
    assert rep.acceptable is False
    assert rep.fractional_savings == pytest.approx(18 / (12 * 10))
    assert rep.timestamps[0] == "2017-01-02T00:00:00Z"


def test_quantify_rejects_misaligned_or_missing():
    idx = pd.date_range("2017-01-02", periods=3, freq="h", tz="UTC")
    with pytest.raises(MVError):
        quantify(pd.Series([1.0, 2, 3], index=idx), pd.Series([1.0, 2, 3], index=idx + pd.Timedelta("1h")), _score())
    with pytest.raises(MVError):
        quantify([1.0, np.nan], [1.0, 1.0], _score())
    with pytest.raises(MVError):
        quantify([1.0, 2.0], [1.0, 1.0], _score(), weights=[1, 0])


def test_acceptability_table_from_mappings():
    rows = acceptability_table(
        [{"frequency": "daily", "family": "ann", "savings": 10.0, "se": 4.0},
         {"frequency": "daily", "family": "svm", "savings": 10.0, "se": 5.0}]
    )
    assert [r["acceptable"] for r in rows] == ["Yes", "No"]


def test_ashrae_uncertainty_formula():
    u = ashrae_uncertainty(10.0, 0.2, 100, 50, 1.0)
    assert u == pytest.approx(1.26 * 0.5 * np.sqrt(102 / 5000))
    with pytest.raises(MVError):
        ashrae_uncertainty(10.0, 0.0, 100, 50, 1.0)


def _reporting(values, freq="D"):
    return make_matrix({"x": np.asarray(values, float), "y": np.ones(len(values))}, "y", freq=freq)


def test_range_gate_bounds_inclusive_and_sign_aware():
    assert gate_range(_reporting([9.0, 110.0]), {"x": (10.0, 100.0)}).passed
    assert not gate_range(_reporting([8.99]), {"x": (10.0, 100.0)}).passed
    assert not gate_range(_reporting([110.01]), {"x": (10.0, 100.0)}).passed
    # negative limits widen outwards
    assert gate_range(_reporting([-11.0, -4.5]), {"x": (-10.0, -5.0)}).passed
    assert not gate_range(_reporting([-11.01]), {"x": (-10.0, -5.0)}).passed
    assert not gate_range(_reporting([-4.49]), {"x": (-10.0, -5.0)}).passed


def test_range_gate_advisory_text():
    res = gate_range(_reporting([1.0, 200.0]), {"x": (10.0, 100.0)})
    assert not res["x"].within
    assert len(res.advisories) == 1 and ADVISORY in res.advisories[0]


def test_range_gate_from_training_matrix():
    train = _reporting([5.0, 10.0])
    assert gate_range(_reporting([4.5, 11.0]), train).passed


def test_adjustments_multiply_and_compose():
    idx = pd.date_range("2017-01-01", periods=6, freq="D", tz="UTC")
    base = pd.Series(np.full(6, 100.0), index=idx)
    recs = [
        AdjustmentRecord("extension", date(2017, 1, 2), date(2017, 1, 4), 1.1, "new wing", "owner, ESCO"),
        AdjustmentRecord("shutdown", date(2017, 1, 4), date(2017, 1, 5), 0.5),
    ]
    out = apply_adjustments(base, recs)
    np.testing.assert_allclose(out.to_numpy(), [100, 110, 110, 55, 50, 100])
    assert "new wing" in recs[0].audit_line() and "owner, ESCO" in recs[0].audit_line()


def test_adjustments_overlap_with_interval_length():
    idx = pd.date_range("2016-12-26", periods=3, freq="7D", tz="UTC")
    base = pd.Series(np.ones(3), index=idx)
    rec = AdjustmentRecord("a", date(2017, 1, 1), date(2017, 1, 1), 2.0)
    assert list(apply_adjustments(base, [rec]).to_numpy()) == [1.0, 1.0, 1.0]
    assert list(apply_adjustments(base, [rec], frequency="weekly").to_numpy()) == [2.0, 1.0, 1.0]


def test_adjustment_validation(tmp_path):
    with pytest.raises(MVError):
        AdjustmentRecord("a", "2017-01-01", "2017-01-02", 0.0)
    with pytest.raises(MVError):
        AdjustmentRecord("a", "2017-01-03", "2017-01-02", 1.0)
    idx = pd.date_range("2017-01-01", periods=2, freq="D", tz="UTC")
    with pytest.raises(MVError):
        apply_adjustments(
            pd.Series([1.0, 1.0], index=idx),
            [AdjustmentRecord("a", "2016-12-01", "2017-01-02", 1.2)],
            period=Period("2017-01-01", "2017-05-31"),
        )
    f = tmp_path / "adj.yaml"
    f.write_text("adjustments:\n  - {name: a, start: 2017-01-01, end: 2017-01-09, factor: 1.2}\n")
    (rec,) = load_adjustments(f)
    assert rec.factor == 1.2 and rec.end == date(2017, 1, 9)


def test_quantify_records_adjustments_and_series(tmp_path):
    idx = pd.date_range("2017-01-01", periods=2, freq="D", tz="UTC")
    base = pd.Series([10.0, 10.0], index=idx)
    rec = AdjustmentRecord("a", "2017-01-02", "2017-01-02", 1.5)
    adj = apply_adjustments(base, [rec])
    rep = quantify(pd.Series([8.0, 8.0], index=idx), base, _score(), adjustments=[rec], adjusted=adj)
    assert rep.total_savings == 2.0 + 7.0
    assert rep.adjustments == (rec.audit_line(),)
    lines = rep.write_series(tmp_path / "ts.csv").read_text().splitlines()
    assert lines[2] == "2017-01-02T00:00:00Z,8.0,10.0,15.0,1"
