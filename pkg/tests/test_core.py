from __future__ import annotations

import math
from datetime import date

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mandv.core import (
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
    read_stored_dataset,
    write_channel_metadata,
    write_csv,
)
from mandv.exceptions import FrequencyError, HierarchyError, IngestError, InsufficientDataError, MVError

MANIFEST = {"site": "plantA", "dependent": "chw-elec", "columns": {"chw-elec": {"equip": "chw", "point": "elec", "unit": "kWh"}}}


def _write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_frequency_parse_aliases_and_order():
    assert Frequency.parse("15-minute") is Frequency.MIN15
    assert Frequency.parse("H") is Frequency.HOURLY
    assert Frequency.parse(pd.Timedelta("1D")) is Frequency.DAILY
    assert Frequency.parse_list(["weekly", "15min", "daily"]) == (
        Frequency.MIN15,
        Frequency.DAILY,
        Frequency.WEEKLY,
    )
    with pytest.raises(FrequencyError):
        Frequency.parse("monthly")


def test_period_grid_counts_calendar_points():
    # 2016 is a leap year: Jan 1 to Oct 29 inclusive is 303 days
    p = Period("2016-01-01", "2016-10-29")
    days = (date(2016, 10, 29) - date(2016, 1, 1)).days + 1
    assert days == 303
    assert len(p.grid(Frequency.MIN15)) == days * 96 == 29088


def _config(**kw):
    base = dict(
        ecm="chiller upgrade",
        boundary="chw plant",
        baseline_period=("2016-01-01", "2016-06-30"),
        implementation_period=("2016-07-01", "2016-07-31"),
        reporting_period=("2016-08-01", "2016-12-31"),
        dependent="chw-elec",
    )
    base.update(kw)
    return ProjectConfig.from_mapping(base)


def test_config_defaults_and_validation():
    cfg = _config()
    assert cfg.confidence_level == 0.68
    assert cfg.frequencies[0] is Frequency.MIN15
    with pytest.raises(MVError):
        _config(implementation_period=("2016-06-01", "2016-07-31"))
    with pytest.raises(MVError):
        _config(confidence=1.0)
    with pytest.raises(MVError):
        _config(frequencies=[])
    with pytest.raises(FrequencyError):
        _config(frequencies=["monthly"])
    with pytest.raises(MVError):
        _config(colour="blue")


def test_config_load_yaml(tmp_path):
    p = _write(
        tmp_path,
        "ecm: x\nboundary: y\nbaseline_period: {start: 2016-01-01, end: 2016-02-01}\n"
        "implementation_period: {start: 2016-02-02, end: 2016-02-03}\n"
        "reporting_period: {start: 2016-02-04, end: 2016-03-01}\ndependent: a-b\n"
        "frequencies: [hourly, daily]\n",
        "cfg.yaml",
    )
    cfg = ProjectConfig.load(p)
    assert cfg.frequencies == (Frequency.HOURLY, Frequency.DAILY)
    assert cfg.baseline_period.end == date(2016, 2, 1)


def test_ingest_minimal(tmp_path):
    p = _write(tmp_path, "timestamp,chw-elec\n2016-01-01T00:00Z,1.5\n2016-01-01T00:15Z,2\n2016-01-01T00:30Z,3\n2016-01-01T00:45Z,4\n")
    ds = ingest_csv(p, MANIFEST)
    assert len(ds) == 1
    ch = ds.channels[0]
    assert len(ch) == 4
    assert ch.id == "plantA.chw-elec"
    assert ch.unit == "kWh"
    assert ds.native_frequency is Frequency.MIN15
    assert ds.dependent_id == "plantA.chw-elec"


def test_ingest_missing_cell_is_nan_not_zero(tmp_path):
    p = _write(tmp_path, "timestamp,chw-elec\n2016-01-01T00:00Z,1\n2016-01-01T00:15Z,2\n2016-01-01T00:30Z,NaN\n2016-01-01T00:45Z,bad\n")
    v = ingest_csv(p, MANIFEST).channels[0].values
    assert math.isnan(v[2]) and math.isnan(v[3])
    assert v[0] == 1.0


def test_ingest_errors(tmp_path):
    dup = _write(tmp_path, "timestamp,chw-elec\n2016-01-01T00:00Z,1\n2016-01-01T00:00Z,2\n", "dup.csv")
    with pytest.raises(IngestError, match="duplicate"):
        ingest_csv(dup, MANIFEST)
    nots = _write(tmp_path, "meter,chw-elec\nabc,1\ndef,2\n", "nots.csv")
    with pytest.raises(IngestError, match="timestamp"):
        ingest_csv(nots, MANIFEST)
    ok = _write(tmp_path, "timestamp,chw-elec\n2016-01-01T00:00Z,1\n2016-01-01T00:15Z,2\n", "ok.csv")
    bad = {**MANIFEST, "columns": {**MANIFEST["columns"], "ahu04-elec": {"equip": "ahu04", "point": "elec"}}}
    with pytest.raises(IngestError, match="ahu04-elec"):
        ingest_csv(ok, bad)


def test_ingest_505_columns(tmp_path):
    rng = np.random.default_rng(0)
    idx = pd.date_range("2016-01-01", periods=6, freq="15min", tz="UTC")
    cols = {"chw-elec": rng.normal(size=6)}
    cols.update({f"eq{i}-pt": rng.normal(size=6) for i in range(504)})
    frame = pd.DataFrame(cols, index=idx.strftime("%Y-%m-%dT%H:%M:%SZ"))
    frame.index.name = "timestamp"
    p = tmp_path / "wide.csv"
    frame.to_csv(p)
    ds = ingest_csv(p, MANIFEST)
    assert len(ds) == 505
    assert ds.dependent_id == "plantA.chw-elec"


def test_csv_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    values = rng.normal(size=(20, 3)) * 10.0 ** rng.integers(-8, 8, size=(20, 3))
    values[4, 1] = np.nan
    idx = pd.date_range("2016-01-01", periods=20, freq="h", tz="UTC")
    frame = pd.DataFrame(values, columns=["chw-elec", "a-b", "c-d"], index=idx.strftime("%Y-%m-%dT%H:%M:%SZ"))
    frame.index.name = "timestamp"
    src = tmp_path / "src.csv"
    frame.to_csv(src, float_format="%.17g")
    ds = ingest_csv(src, MANIFEST)
    out = tmp_path / "out.csv"
    write_csv(ds, out)
    meta = tmp_path / "meta.json"
    write_channel_metadata(ds, meta)
    again = read_stored_dataset(out, meta)
    for a, b in zip(ds.channels, again.channels):
        assert a == b
        np.testing.assert_array_equal(a.values, b.values)


def test_apply_tags_hierarchy_and_idempotence():
    ts = pd.date_range("2016-01-01", periods=3, freq="h", tz="UTC").values
    raw = TaggedChannel("meter7", None, "kWh", ts, np.arange(3.0))
    tagged = apply_tags(raw, {"site": "plantA", "equip": "ahu04", "point": "elec"})
    assert tagged.id == "plantA.ahu04-elec"
    assert apply_tags(tagged, {"site": "plantA", "equip": "ahu04", "point": "elec"}) == tagged
    with pytest.raises(HierarchyError):
        apply_tags(raw, {"site": "plantA", "point": "elec"})
    with pytest.raises(HierarchyError):
        Tags("", "ahu", "elec")


def test_channel_timestamps_must_increase():
    ts = pd.to_datetime(["2016-01-01T01:00Z", "2016-01-01T00:00Z"]).values
    with pytest.raises(MVError):
        TaggedChannel("x", None, "", ts, np.zeros(2))


def _dataset(values_dep, values_x):
    ts = pd.date_range("2016-01-01", periods=len(values_dep), freq="15min", tz="UTC").values
    dep = TaggedChannel("s.chw-elec", Tags("s", "chw", "elec"), "kWh", ts, np.asarray(values_dep, float))
    x = TaggedChannel("s.oat-temp", Tags("s", "oat", "temp"), "C", ts, np.asarray(values_x, float))
    return RawDataset((dep, x), Frequency.MIN15, dep.id)


def test_align_full_and_dependent_filter():
    period = Period("2016-01-01", "2016-01-01")
    full = align(_dataset(range(8), range(8)), period)
    assert full.n_rows == 8 and full.columns == ["s.oat-temp", "s.chw-elec"]
    assert full.grid_rows == 96
    dep = [0, 1, 2, 3, np.nan, 5, 6, 7]
    x = [0, np.nan, 2, 3, 4, 5, 6, 7]
    m = align(_dataset(dep, x), period)
    assert m.n_rows == 7
    assert np.isnan(m.frame["s.oat-temp"].iloc[1])


def test_align_without_dependent_data_raises():
    with pytest.raises(InsufficientDataError):
        align(_dataset([np.nan] * 4, range(4)), Period("2016-01-01", "2016-01-01"))


def test_duplicate_channel_ids_rejected():
    ds = _dataset(range(3), range(3))
    with pytest.raises(MVError):
        RawDataset(ds.channels + ds.channels[:1], Frequency.MIN15)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.one_of(st.none(), st.floats(-1e6, 1e6, allow_nan=False)), min_size=4, max_size=30),
    st.lists(st.booleans(), min_size=30, max_size=30),
)
def test_align_never_invents_values(values, dep_present):
    n = len(values)
    x = np.array([np.nan if v is None else v for v in values])
    dep = np.where(np.array(dep_present[:n]), np.arange(n, dtype=float), np.nan)
    if np.isnan(dep).all():
        dep[0] = 0.0
    ds = _dataset(dep, x)
    m = align(ds, Period("2016-01-01", "2016-01-01"))
    assert m.n_rows <= m.grid_rows
    src = pd.Series(x, index=pd.DatetimeIndex(ds.channels[1].timestamps, tz="UTC"))
    for ts, v in m.frame["s.oat-temp"].items():
        if np.isnan(v):
            assert np.isnan(src[ts])
        else:
            assert v == src[ts]


def test_feature_matrix_target_last_and_take():
    idx = pd.date_range("2016-01-01", periods=4, freq="h", tz="UTC")
    m = FeatureMatrix(pd.DataFrame({"y": [1.0, 2, 3, 4], "a": [4.0, 3, 2, 1]}, index=idx), "y", "hourly")
    assert m.columns == ["a", "y"]
    t = m.take([2, 0])
    assert list(t.y) == [3.0, 1.0]
    assert t.sorted().index.is_monotonic_increasing
    with pytest.raises(MVError):
        FeatureMatrix(pd.DataFrame({"y": [1.0]}, index=pd.DatetimeIndex(["2016-01-01"])), "y", "hourly")
