from __future__ import annotations

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_matrix
from mandv.exceptions import InsufficientDataError, MVError
from mandv.quality import assess, clean, flag_rows, omit_poor_features, substitute_block


def test_assess_box_plot_rule_hand_computed():
    m = make_matrix({"x": np.r_[np.arange(1.0, 10.0), 100.0], "y": np.arange(10.0)}, "y")
    s = assess(m)["x"]
    # linear interpolation: Q1 at position 2.25 -> 3.25, Q3 at 6.75 -> 7.75
    assert (s.q1, s.q2, s.q3) == (3.25, 5.5, 7.75)
    assert s.upper_fence == 7.75 + 1.5 * 4.5
    assert s.outlier_count == 1
    assert s.minimum <= s.q1 <= s.median <= s.q3 <= s.maximum


def test_assess_constant_column():
    s = assess(make_matrix({"c": np.full(20, 3.0), "y": np.arange(20.0)}, "y"))["c"]
    assert (s.missing_count, s.unique_count, s.outlier_count) == (0, 1, 0)


def test_poor_fraction_counts_missing_against_grid(rng):
    x = rng.normal(size=100)
    x[:6] = np.nan
    s = assess(make_matrix({"x": x, "y": rng.normal(size=100)}, "y"))["x"]
    assert s.missing_count == 6
    assert s.poor_quality_fraction >= 0.06
    assert s.poor_quality_fraction == (s.missing_count + s.outlier_count) / 100


def test_assess_needs_four_values():
    with pytest.raises(InsufficientDataError):
        assess(make_matrix({"x": [1.0, 2, np.nan, np.nan, np.nan], "y": np.arange(5.0)}, "y"))


def test_omission_threshold_is_strict(rng):
    n = 1000
    data = {f"f{i}": rng.uniform(size=n) for i in range(15)}
    for i in range(5):
        data[f"f{i}"][: 60 + i] = np.nan
    data["edge"] = rng.uniform(size=n)
    data["edge"][:50] = np.nan
    data["y"] = rng.uniform(size=n)
    summary = assess(make_matrix(data, "y"))
    omitted = omit_poor_features(summary)
    assert sorted(omitted) == [f"f{i}" for i in range(5)]
    assert summary["edge"].poor_quality_fraction == 0.05
    assert "edge" not in omitted
    kept = [f for f in summary.features if f not in omitted and f != "y"]
    assert len(kept) == 11


def test_clean_no_flags_is_identity(rng):
    m = make_matrix({"x": rng.uniform(size=50), "y": rng.uniform(size=50)}, "y")
    assert clean(m, assess(m)).equals(m)


def test_clean_one_outlier_row():
    x = np.tile(np.arange(1.0, 11.0), 10)
    x[37] = 1e6
    m = make_matrix({"x": x, "y": np.tile(np.arange(10.0), 10)}, "y")
    out = clean(m, assess(m))
    assert out.n_rows == 99
    assert m.index[37] not in out.index


def test_clean_drops_exactly_flagged_rows(rng):
    n = 120
    x, z = rng.normal(size=n), rng.normal(size=n)
    y = rng.normal(size=n)
    x[[3, 50]] = np.nan
    z[[10, 11]] = 40.0
    y[[70, 71, 119]] = [np.nan, -50.0, 60.0]
    m = make_matrix({"x": x, "z": z, "y": y}, "y")
    summary = assess(m)
    out = clean(m, summary)
    # oracle: independent row scan against the fences
    fences = {c: (summary[c].lower_fence, summary[c].upper_fence) for c in m.columns}
    expected = [
        i
        for i in range(n)
        if any(np.isnan(m.frame[c].iat[i]) or not fences[c][0] <= m.frame[c].iat[i] <= fences[c][1] for c in m.columns)
    ]
    assert len(expected) == 7
    assert out.n_rows + len(expected) == n
    assert set(m.index[expected]).isdisjoint(out.index)


def test_clean_refuses_to_drop_most_rows(rng):
    x = rng.normal(size=20)
    x[:11] = np.nan
    m = make_matrix({"x": x, "y": rng.normal(size=20)}, "y")
    with pytest.raises(InsufficientDataError):
        clean(m, assess(m))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_clean_idempotent_and_no_invention(seed):
    rng = np.random.default_rng(seed)
    n = 60
    data = {"a": rng.normal(size=n), "b": rng.normal(size=n), "y": rng.normal(size=n)}
    for col in data:
        data[col][rng.choice(n, 2, replace=False)] = np.nan
        data[col][rng.choice(n, 1)] = 30.0
    m = make_matrix(data, "y")
    summary = assess(m)
    once = clean(m, summary)
    assert clean(once, summary).equals(once)
    for ts, row in once.frame.iterrows():
        assert (m.frame.loc[ts] == row).all()
    # nothing flagged under the original fences survives
    assert not flag_rows(once, summary).any()


def test_substitution_is_explicit_and_logged(caplog):
    idx16 = pd.date_range("2016-03-01", periods=8, freq="h", tz="UTC")
    idx15 = idx16 - pd.DateOffset(years=1)
    cur = make_matrix({"x": [1.0, 2, np.nan, np.nan, 5, 6, 7, 8], "y": np.arange(8.0)}, "y", start=idx16[0], freq="h")
    donor = make_matrix({"x": np.arange(100.0, 108.0), "y": np.arange(8.0)}, "y", start=idx15[0], freq="h")
    with pytest.raises(MVError):
        substitute_block(cur, donor, "x", idx16[0], idx16[-1], reason="")
    with caplog.at_level("WARNING"):
        out, rec = substitute_block(cur, donor, "x", idx16[0], idx16[-1], reason="meter offline")
    assert list(out.frame["x"])[:5] == [1.0, 2.0, 102.0, 103.0, 5.0]
    assert rec.rows == 2
    assert "meter offline" in caplog.text
