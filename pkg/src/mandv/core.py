"""Project configuration, tagged meter channels and file-based ingestion.

Raw exports from a BMS/EMS arrive as a wide CSV (first column an ISO-8601
timestamp, one column per meter) together with a separate tag manifest that
gives every column a site -> equip -> point context. Ingestion never alters the
export itself; unparseable cells become missing values (NaN), never zeros.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import MISSING, dataclass, field, replace
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd
import yaml

from .exceptions import (
    FrequencyError,
    HierarchyError,
    IngestError,
    InsufficientDataError,
    MVError,
)

__all__ = [
    "Frequency",
    "Period",
    "StaticFactor",
    "ProjectConfig",
    "Tags",
    "TaggedChannel",
    "RawDataset",
    "FeatureMatrix",
    "ingest_csv",
    "write_csv",
    "load_manifest",
    "apply_tags",
    "align",
]

_TIMESTAMP_NAMES = {"timestamp", "time", "datetime", "date"}


class Frequency(str, Enum):
    """Measurement frequencies supported for modelling."""

    MIN15 = "15min"
    HOURLY = "hourly"
    DAILY = "daily"
    WEEKLY = "weekly"

    @property
    def duration(self) -> pd.Timedelta:
        return _DURATIONS[self]

    @classmethod
    def parse(cls, value) -> "Frequency":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace(" ", "")
        try:
            return _ALIASES[key]
        except KeyError:
            pass
        try:
            td = pd.Timedelta(key)
        except (ValueError, TypeError):
            td = None
        if td is not None:
            for freq, dur in _DURATIONS.items():
                if dur == td:
                    return freq
            if td > _DURATIONS[cls.WEEKLY]:
                raise FrequencyError(
                    f"frequency {value!r} is coarser than weekly; too little "
                    "test data would remain"
                )
        if key in {"monthly", "month", "1m", "yearly", "annual"}:
            raise FrequencyError(
                f"frequency {value!r} is coarser than weekly; too little test "
                "data would remain"
            )
        raise FrequencyError(f"unsupported frequency {value!r}")

    @classmethod
    def parse_list(cls, values) -> tuple["Frequency", ...]:
        if isinstance(values, str):
            values = [v for v in values.split(",") if v.strip()]
        out = []
        for v in values:
            f = cls.parse(v)
            if f not in out:
                out.append(f)
        return tuple(sorted(out, key=lambda f: f.duration))

    def __str__(self) -> str:
        return self.value


_DURATIONS = {
    Frequency.MIN15: pd.Timedelta(minutes=15),
    Frequency.HOURLY: pd.Timedelta(hours=1),
    Frequency.DAILY: pd.Timedelta(days=1),
    Frequency.WEEKLY: pd.Timedelta(weeks=1),
}

_ALIASES = {
    "15min": Frequency.MIN15,
    "15-min": Frequency.MIN15,
    "15-minute": Frequency.MIN15,
    "15minute": Frequency.MIN15,
    "15m": Frequency.MIN15,
    "15t": Frequency.MIN15,
    "hourly": Frequency.HOURLY,
    "hour": Frequency.HOURLY,
    "h": Frequency.HOURLY,
    "1h": Frequency.HOURLY,
    "daily": Frequency.DAILY,
    "day": Frequency.DAILY,
    "d": Frequency.DAILY,
    "1d": Frequency.DAILY,
    "weekly": Frequency.WEEKLY,
    "week": Frequency.WEEKLY,
    "w": Frequency.WEEKLY,
    "1w": Frequency.WEEKLY,
}


def _to_date(value) -> date:
    if isinstance(value, pd.Timestamp):
        return value.date()
    if isinstance(value, date):
        return value
    return date.fromisoformat(str(value))


@dataclass(frozen=True)
class Period:
    """Calendar interval with inclusive start and end dates (UTC days)."""

    start: date
    end: date

    def __post_init__(self):
        object.__setattr__(self, "start", _to_date(self.start))
        object.__setattr__(self, "end", _to_date(self.end))
        if self.end < self.start:
            raise MVError(f"period ends before it starts: {self.start} > {self.end}")

    @classmethod
    def from_value(cls, value) -> "Period":
        if isinstance(value, Period):
            return value
        if isinstance(value, Mapping):
            return cls(value["start"], value["end"])
        start, end = value
        return cls(start, end)

    @property
    def bounds(self) -> tuple[pd.Timestamp, pd.Timestamp]:
        """Half-open ``[start, end + 1 day)`` as UTC timestamps."""
        lo = pd.Timestamp(self.start, tz="UTC")
        hi = pd.Timestamp(self.end, tz="UTC") + pd.Timedelta(days=1)
        return lo, hi

    def grid(self, frequency: Frequency) -> pd.DatetimeIndex:
        lo, hi = self.bounds
        return pd.date_range(lo, hi, freq=Frequency.parse(frequency).duration, inclusive="left")

    def as_dict(self) -> dict:
        return {"start": self.start.isoformat(), "end": self.end.isoformat()}


@dataclass(frozen=True)
class StaticFactor:
    name: str
    description: str = ""


@dataclass(frozen=True)
class ProjectConfig:
    """Scope of an M&V project: measure, boundary, periods and static factors.

    ``grid`` and ``families`` are optional overrides of the model search; the
    defaults reproduce the recommended hyper-parameter grids.
    """

    ecm_description: str
    boundary_description: str
    baseline_period: Period
    implementation_period: Period
    reporting_period: Period
    dependent_channel_id: str
    static_factors: tuple[StaticFactor, ...] = ()
    confidence_level: float = 0.68
    frequencies: tuple[Frequency, ...] = (
        Frequency.MIN15,
        Frequency.HOURLY,
        Frequency.DAILY,
        Frequency.WEEKLY,
    )
    families: tuple[str, ...] = ("ols", "knn", "ann", "svm")
    grid: Mapping = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        for name in ("baseline_period", "implementation_period", "reporting_period"):
            object.__setattr__(self, name, Period.from_value(getattr(self, name)))
        object.__setattr__(self, "frequencies", Frequency.parse_list(self.frequencies))
        object.__setattr__(
            self,
            "static_factors",
            tuple(
                sf if isinstance(sf, StaticFactor) else StaticFactor(**sf)
                for sf in self.static_factors
            ),
        )
        object.__setattr__(self, "families", tuple(f.lower() for f in self.families))
        b, i, r = self.baseline_period, self.implementation_period, self.reporting_period
        if not (b.end < i.start and i.end < r.start):
            raise MVError(
                "periods must be non-overlapping and ordered baseline < "
                "implementation < reporting"
            )
        if not 0.0 < self.confidence_level < 1.0:
            raise MVError(f"confidence_level must lie in (0, 1), got {self.confidence_level}")
        if not self.frequencies:
            raise MVError("at least one measurement frequency is required")
        unknown = set(self.families) - {"ols", "knn", "ann", "svm"}
        if unknown or not self.families:
            raise MVError(f"unknown or empty model families: {sorted(unknown)}")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "ProjectConfig":
        d = dict(data)
        rename = {
            "ecm": "ecm_description",
            "boundary": "boundary_description",
            "dependent": "dependent_channel_id",
            "confidence": "confidence_level",
        }
        for old, new in rename.items():
            if old in d:
                d[new] = d.pop(old)
        d.setdefault("ecm_description", "")
        d.setdefault("boundary_description", "")
        for key in ("static_factors", "frequencies", "families"):
            if key in d and d[key] is not None and not isinstance(d[key], str):
                d[key] = tuple(d[key])
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise MVError(f"unknown config keys: {sorted(extra)}")
        required = {
            name for name, f in cls.__dataclass_fields__.items()
            if f.default is MISSING and f.default_factory is MISSING
        }
        absent = required - set(d)
        if absent:
            raise MVError(f"config is missing required keys: {sorted(absent)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ProjectConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, Mapping):
            raise MVError(f"config {path} is not a mapping")
        return cls.from_mapping(data)

    def check_dataset(self, dataset: "RawDataset") -> str:
        """Resolve the dependent channel against an ingested dataset."""
        return dataset.resolve(self.dependent_channel_id)

    def as_dict(self) -> dict:
        return {
            "ecm": self.ecm_description,
            "boundary": self.boundary_description,
            "baseline_period": self.baseline_period.as_dict(),
            "implementation_period": self.implementation_period.as_dict(),
            "reporting_period": self.reporting_period.as_dict(),
            "dependent": self.dependent_channel_id,
            "static_factors": [
                {"name": s.name, "description": s.description} for s in self.static_factors
            ],
            "confidence": self.confidence_level,
            "frequencies": [f.value for f in self.frequencies],
            "families": list(self.families),
            "grid": dict(self.grid),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class Tags:
    """Haystack-style context: a point on a piece of equipment on a site."""

    site: str
    equip: str
    point: str
    markers: frozenset = frozenset()

    def __post_init__(self):
        for level in ("site", "equip", "point"):
            value = getattr(self, level)
            if value is None or not str(value).strip():
                raise HierarchyError(f"tag set is missing the {level!r} level")
            object.__setattr__(self, level, str(value).strip())
        if "." in self.site:
            raise HierarchyError(f"site name may not contain '.': {self.site!r}")
        object.__setattr__(self, "markers", frozenset(self.markers))

    @classmethod
    def from_mapping(cls, data: Mapping) -> "Tags":
        extra = {k for k in data if k not in {"site", "equip", "point", "unit", "markers"}}
        markers = set(data.get("markers") or ()) | extra
        return cls(data.get("site"), data.get("equip"), data.get("point"), frozenset(markers))

    @property
    def name(self) -> str:
        return f"{self.site}.{self.equip}-{self.point}"

    @property
    def short_name(self) -> str:
        return f"{self.equip}-{self.point}"

    def as_dict(self) -> dict:
        d = {"site": self.site, "equip": self.equip, "point": self.point}
        if self.markers:
            d["markers"] = sorted(self.markers)
        return d


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TaggedChannel:
    """One metered variable: identifier, tags, unit and its time series.

    Timestamps are UTC instants stored as ``datetime64[ns]``; missing readings
    are NaN. Both arrays are read-only.
    """

    id: str
    tags: Tags | None
    unit: str
    timestamps: np.ndarray
    values: np.ndarray
    source: str | None = None

    def __post_init__(self):
        ts = pd.DatetimeIndex(self.timestamps)
        if ts.tz is not None:
            ts = ts.tz_convert("UTC").tz_localize(None)
        ts = ts.values.astype("datetime64[ns]")
        vals = np.asarray(self.values, dtype=float)
        if ts.shape != vals.shape:
            raise MVError(f"channel {self.id!r}: timestamps and values differ in length")
        if ts.size > 1 and not np.all(ts[1:] > ts[:-1]):
            raise MVError(f"channel {self.id!r}: timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", _readonly(ts))
        object.__setattr__(self, "values", _readonly(vals))

    def __eq__(self, other):
        if not isinstance(other, TaggedChannel):
            return NotImplemented
        return (
            self.id == other.id
            and self.tags == other.tags
            and self.unit == other.unit
            and self.source == other.source
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None

    @property
    def series(self) -> pd.Series:
        idx = pd.DatetimeIndex(self.timestamps).tz_localize("UTC")
        return pd.Series(np.array(self.values), index=idx, name=self.id)

    def __len__(self) -> int:
        return self.values.size


def apply_tags(channel: TaggedChannel, tags) -> TaggedChannel:
    """Contextualise a channel; its id becomes ``site.equip-point``.

    >>> ch = TaggedChannel("meter", None, "kWh", [], [])
    >>> apply_tags(ch, {"site": "plantA", "equip": "ahu04", "point": "elec"}).id
    'plantA.ahu04-elec'
    """
    if not isinstance(tags, Tags):
        tags = Tags.from_mapping(tags)
    if channel.tags == tags and channel.id == tags.name:
        return channel
    return replace(channel, id=tags.name, tags=tags, source=channel.source or channel.id)


@dataclass(frozen=True)
class RawDataset:
    """All ingested channels plus the native sampling frequency."""

    channels: tuple[TaggedChannel, ...]
    native_frequency: Frequency
    dependent_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "native_frequency", Frequency.parse(self.native_frequency))
        ids = [c.id for c in self.channels]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise MVError(f"duplicate channel ids: {dup}")
        if self.dependent_id is not None and self.dependent_id not in ids:
            raise MVError(f"dependent channel {self.dependent_id!r} not in dataset")

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.channels]

    def __len__(self) -> int:
        return len(self.channels)

    def __getitem__(self, key: str) -> TaggedChannel:
        return self.channels[self.ids.index(self.resolve(key))]

    def resolve(self, name: str) -> str:
        """Map a channel id, short ``equip-point`` name or source column to an id."""
        for c in self.channels:
            if c.id == name:
                return c.id
        hits = [
            c.id
            for c in self.channels
            if c.source == name or (c.tags is not None and c.tags.short_name == name)
        ]
        if len(hits) == 1:
            return hits[0]
        if not hits:
            raise MVError(f"no channel named {name!r}")
        raise MVError(f"channel name {name!r} is ambiguous: {hits}")

    def to_frame(self) -> pd.DataFrame:
        return pd.concat([c.series for c in self.channels], axis=1)

    def config_check(self, config: ProjectConfig) -> None:
        if self.native_frequency not in config.frequencies:
            raise FrequencyError(
                f"native frequency {self.native_frequency} is not among the "
                "configured frequencies"
            )
        if self.native_frequency != min(config.frequencies, key=lambda f: f.duration):
            raise FrequencyError(
                "native frequency must be the finest configured frequency"
            )
        config.check_dataset(self)


def load_manifest(path) -> dict:
    """Read a tag manifest (YAML or JSON).

    Layout::

        site: plantA          # default site for every column
        unit: kWh             # default unit
        dependent: chw-elec   # column holding the dependent variable
        columns:
          chw-elec: {equip: chw, point: elec, unit: kWh}

    Columns absent from ``columns`` are tagged by splitting their name at the
    first ``-`` into equip and point.
    """
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, Mapping):
        raise IngestError(f"manifest {path} is not a mapping")
    data = dict(data)
    data["columns"] = dict(data.get("columns") or {})
    return data


def _column_tags(column: str, manifest: Mapping) -> tuple[Tags, str]:
    entry = dict(manifest["columns"].get(column) or {})
    entry.setdefault("site", manifest.get("site"))
    if "equip" not in entry or "point" not in entry:
        equip, sep, point = column.partition("-")
        if not sep:
            raise IngestError(
                f"column {column!r} has no manifest entry and its name cannot be "
                "split into equip-point"
            )
        entry.setdefault("equip", equip)
        entry.setdefault("point", point)
    unit = str(entry.get("unit", manifest.get("unit", "")) or "")
    try:
        tags = Tags.from_mapping(entry)
    except HierarchyError as exc:
        raise IngestError(f"column {column!r}: {exc}") from exc
    return tags, unit


def _parse_column(raw: pd.Series) -> np.ndarray:
    if raw.dtype.kind == "f":
        return raw.to_numpy(dtype=float)
    out = np.empty(len(raw), dtype=float)
    for i, cell in enumerate(raw.to_numpy()):
        try:
            out[i] = float(cell)
        except (TypeError, ValueError):
            out[i] = math.nan
    return out


def _infer_frequency(ts: pd.DatetimeIndex) -> Frequency:
    if len(ts) < 2:
        raise IngestError("cannot infer the native frequency from fewer than 2 rows")
    diffs = pd.Series(ts[1:] - ts[:-1])
    return Frequency.parse(diffs.mode().iloc[0])


def ingest_csv(path, tag_manifest, native_frequency=None) -> RawDataset:
    """Read a wide meter export and its tag manifest into a :class:`RawDataset`."""
    manifest = tag_manifest if isinstance(tag_manifest, Mapping) else load_manifest(tag_manifest)
    manifest = {**manifest, "columns": dict(manifest.get("columns") or {})}
    frame = pd.read_csv(path, float_precision="round_trip", na_values=[""], keep_default_na=True)
    if frame.shape[1] == 0:
        raise IngestError(f"{path}: empty file")
    ts_col = next((c for c in frame.columns if str(c).strip().lower() in _TIMESTAMP_NAMES), None)
    if ts_col is None:
        ts_col = frame.columns[0]
        try:
            pd.to_datetime(frame[ts_col], utc=True, format="ISO8601")
        except (ValueError, TypeError) as exc:
            raise IngestError(f"{path}: missing timestamp column") from exc
    try:
        ts = pd.DatetimeIndex(pd.to_datetime(frame[ts_col], utc=True, format="ISO8601"))
    except (ValueError, TypeError) as exc:
        raise IngestError(f"{path}: unparseable timestamps in column {ts_col!r}") from exc
    if ts.hasnans:
        raise IngestError(f"{path}: empty timestamp cells")
    if ts.has_duplicates:
        dups = ts[ts.duplicated()].unique()[:3]
        raise IngestError(f"{path}: duplicate timestamps, e.g. {list(map(str, dups))}")
    data_cols = [c for c in frame.columns if c != ts_col]
    absent = [c for c in manifest["columns"] if c not in data_cols]
    if absent:
        raise IngestError(f"manifest references columns absent from the CSV: {absent}")
    order = np.argsort(ts.values, kind="stable")
    ts = ts[order]
    channels = []
    for col in data_cols:
        tags, unit = _column_tags(str(col), manifest)
        values = _parse_column(frame[col])[order]
        channels.append(TaggedChannel(tags.name, tags, unit, ts, values, source=str(col)))
    freq = Frequency.parse(native_frequency) if native_frequency else _infer_frequency(ts)
    dependent = manifest.get("dependent")
    dep_id = None
    if dependent is not None:
        hits = [c.id for c in channels if c.source == dependent or c.id == dependent]
        if not hits:
            raise IngestError(f"manifest dependent {dependent!r} is not a CSV column")
        dep_id = hits[0]
    return RawDataset(tuple(channels), freq, dep_id)


def _format_value(v: float) -> str:
    return "" if math.isnan(v) else repr(float(v))


def write_csv(dataset: RawDataset, path, use_source_names: bool = False) -> None:
    """Serialise channels back to the wide CSV layout (full float precision)."""
    frame = dataset.to_frame()
    names = [
        (c.source or c.id) if use_source_names else c.id for c in dataset.channels
    ]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", *names])
        stamps = frame.index.strftime("%Y-%m-%dT%H:%M:%SZ")
        values = frame.to_numpy(dtype=float)
        for stamp, row in zip(stamps, values):
            w.writerow([stamp, *map(_format_value, row)])


def write_channel_metadata(dataset: RawDataset, path) -> None:
    meta = {
        "native_frequency": dataset.native_frequency.value,
        "dependent": dataset.dependent_id,
        "channels": [
            {
                "id": c.id,
                "source": c.source,
                "unit": c.unit,
                "tags": c.tags.as_dict() if c.tags else None,
            }
            for c in dataset.channels
        ],
    }
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_stored_dataset(csv_path, meta_path) -> RawDataset:
    """Reload a dataset written by :func:`write_csv` + :func:`write_channel_metadata`."""
    meta = json.loads(Path(meta_path).read_text())
    manifest = {"columns": {}, "dependent": meta.get("dependent")}
    for entry in meta["channels"]:
        tags = dict(entry["tags"])
        tags["unit"] = entry["unit"]
        manifest["columns"][entry["id"]] = tags
    ds = ingest_csv(csv_path, manifest, meta["native_frequency"])
    channels = tuple(
        replace(c, source=e["source"]) for c, e in zip(ds.channels, meta["channels"])
    )
    return RawDataset(channels, ds.native_frequency, ds.dependent_id)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Aligned observation table: timestamps x features, dependent last.

    ``counts`` holds how many native-frequency rows each row represents (all
    ones before aggregation). ``grid_rows`` is the size of the native grid the
    matrix was cut from, the reference for missing-value counts. Treat the
    frame as read-only; every operation returns a new matrix.
    """

    frame: pd.DataFrame
    target: str
    frequency: Frequency
    counts: np.ndarray | None = None
    grid_rows: int | None = None

    def __post_init__(self):
        if self.target not in self.frame.columns:
            raise MVError(f"dependent {self.target!r} not in matrix columns")
        idx = self.frame.index
        if not isinstance(idx, pd.DatetimeIndex) or idx.tz is None:
            raise MVError("FeatureMatrix index must be a tz-aware DatetimeIndex")
        if not idx.is_unique:
            raise MVError("FeatureMatrix timestamps must be unique")
        cols = [c for c in self.frame.columns if c != self.target] + [self.target]
        if list(self.frame.columns) != cols:
            object.__setattr__(self, "frame", self.frame[cols])
        object.__setattr__(self, "frequency", Frequency.parse(self.frequency))
        counts = np.ones(len(idx), dtype=np.int64) if self.counts is None else np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (len(idx),):
            raise MVError("counts must have one entry per row")
        object.__setattr__(self, "counts", _readonly(counts))
        if self.grid_rows is None:
            object.__setattr__(self, "grid_rows", len(idx))

    @property
    def features(self) -> list[str]:
        return [c for c in self.frame.columns if c != self.target]

    @property
    def columns(self) -> list[str]:
        return list(self.frame.columns)

    @property
    def index(self) -> pd.DatetimeIndex:
        return self.frame.index

    @property
    def X(self) -> np.ndarray:
        return self.frame[self.features].to_numpy(dtype=float)

    @property
    def y(self) -> np.ndarray:
        return self.frame[self.target].to_numpy(dtype=float)

    @property
    def n_rows(self) -> int:
        return len(self.frame)

    def __len__(self) -> int:
        return len(self.frame)

    def select(self, features: Iterable[str]) -> "FeatureMatrix":
        features = list(features)
        missing = [f for f in features if f not in self.frame.columns]
        if missing:
            raise MVError(f"unknown features: {missing}")
        return replace(self, frame=self.frame[features + [self.target]])

    def take(self, positions: Sequence[int]) -> "FeatureMatrix":
        positions = np.asarray(positions, dtype=np.int64)
        return replace(self, frame=self.frame.iloc[positions], counts=self.counts[positions])

    def drop_rows(self, mask: np.ndarray) -> "FeatureMatrix":
        keep = ~np.asarray(mask, dtype=bool)
        return replace(self, frame=self.frame.loc[keep], counts=self.counts[keep])

    def sorted(self) -> "FeatureMatrix":
        order = np.argsort(self.frame.index.values, kind="stable")
        return self.take(order)

    def equals(self, other: "FeatureMatrix") -> bool:
        return (
            self.target == other.target
            and self.frequency == other.frequency
            and self.frame.equals(other.frame)
            and np.array_equal(self.counts, other.counts)
        )


def align(dataset: RawDataset, period: Period, dependent: str | None = None) -> FeatureMatrix:
    """Place every channel on the native grid of ``period``.

    Only exact grid timestamps are used; nothing is interpolated. Rows where
    the dependent variable is missing are dropped, missing predictor cells
    stay NaN.
    """
    period = Period.from_value(period)
    dep = dataset.resolve(dependent) if dependent else dataset.dependent_id
    if dep is None:
        raise MVError("no dependent channel given and none recorded in the dataset")
    grid = period.grid(dataset.native_frequency)
    cols = {c.id: c.series.reindex(grid) for c in dataset.channels}
    frame = pd.DataFrame(cols, index=grid)
    present = frame[dep].notna().to_numpy()
    if not present.any():
        raise InsufficientDataError(
            f"dependent channel {dep!r} has no data in {period.start}..{period.end}"
        )
    frame = frame.loc[present]
    frame.index.name = "timestamp"
    return FeatureMatrix(frame, dep, dataset.native_frequency, grid_rows=len(grid))
