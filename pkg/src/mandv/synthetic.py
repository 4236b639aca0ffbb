"""Synthetic facility with a known baseline relationship and a known saving.

Used by the tests and as a worked example for the command-line workflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from .core import Frequency, Period, ProjectConfig, RawDataset, TaggedChannel, _column_tags

__all__ = ["SyntheticFacility", "make_facility"]

SITE = "plantA"
DEPENDENT = "chiller-elec"

BASELINE = Period("2016-01-01", "2016-09-30")
IMPLEMENTATION = Period("2016-10-01", "2016-10-31")
REPORTING = Period("2016-11-01", "2017-05-31")


@dataclass(frozen=True)
class SyntheticFacility:
    """Wide 15-minute table plus everything needed to run it through the workflow.

    ``true_savings`` is the exact reduction injected over the reporting
    period: ``step`` per 15-minute row on every reporting row.
    """

    frame: pd.DataFrame
    manifest: dict
    config: dict
    step: float
    true_savings: float
    target_r2: float

    def project_config(self, **overrides) -> ProjectConfig:
        return ProjectConfig.from_mapping({**self.config, **overrides})

    def dataset(self) -> RawDataset:
        """The channels as an ingested dataset, without going through CSV."""
        ts = pd.DatetimeIndex(self.frame.index)
        channels = []
        for col in self.frame.columns:
            tags, unit = _column_tags(col, self.manifest)
            channels.append(
                TaggedChannel(tags.name, tags, unit, ts, self.frame[col].to_numpy(dtype=float), source=col)
            )
        dep = next(c.id for c in channels if c.source == self.manifest["dependent"])
        return RawDataset(tuple(channels), Frequency.MIN15, dep)

    def write(self, directory) -> dict[str, Path]:
        """Write ``data.csv``, ``manifest.yaml`` and ``config.yaml``."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = {"data": d / "data.csv", "manifest": d / "manifest.yaml", "config": d / "config.yaml"}
        out = self.frame.copy()
        out.index = out.index.strftime("%Y-%m-%dT%H:%M:%SZ")
        out.index.name = "timestamp"
        out.to_csv(paths["data"], float_format="%.17g", lineterminator="\n")
        paths["manifest"].write_text(yaml.safe_dump(self.manifest, sort_keys=True))
        paths["config"].write_text(yaml.safe_dump(self.config, sort_keys=True))
        return paths


def _ar1(rng, n, phi, sd):
    e = rng.normal(0.0, sd * np.sqrt(1 - phi**2), n)
    out = np.empty(n)
    out[0] = rng.normal(0.0, sd)
    for i in range(1, n):
        out[i] = phi * out[i - 1] + e[i]
    return out


def make_facility(
    seed: int = 0,
    step_fraction: float = 0.1,
    target_r2: float = 0.65,
    missing_fraction: float = 0.005,
    outlier_fraction: float = 0.001,
    duplicate_missing: float = 0.07,
) -> SyntheticFacility:
    """Generate ten metered channels at 15-minute spacing over Jan 2016 - May 2017.

    The dependent load is linear in outdoor temperature, production and an
    air-handler load plus white noise sized so the baseline R^2 is about
    ``target_r2``. A near-copy of the air-handler meter (with a gappy export)
    tests the collinearity and data-quality rules; five channels are
    unrelated. From the reporting period on, the load drops by
    ``step_fraction`` of its baseline mean. Baseline data carry random gaps
    and spikes; reporting data are complete.
    """
    rng = np.random.default_rng(seed)
    idx = pd.date_range(
        BASELINE.bounds[0], REPORTING.bounds[1], freq="15min", inclusive="left", name="timestamp"
    )
    n = len(idx)
    doy = idx.dayofyear.to_numpy() + idx.hour.to_numpy() / 24.0
    hour = idx.hour.to_numpy() + idx.minute.to_numpy() / 60.0
    occupied = ((idx.dayofweek.to_numpy() < 5) & (hour >= 7) & (hour < 19)).astype(float)

    oat = 10 + 8 * np.sin(2 * np.pi * (doy - 110) / 365) + 4 * np.sin(2 * np.pi * (hour - 9) / 24)
    oat = oat + _ar1(rng, n, 0.98, 1.5)
    production = 50 + 40 * occupied + rng.normal(0, 5, n)
    ahu = 20 + 1.5 * np.maximum(oat - 12, 0) + 0.8 * np.maximum(12 - oat, 0) + 10 * occupied
    ahu = ahu + rng.normal(0, 3, n)
    ahu_dup = 0.98 * ahu + rng.normal(0, 0.3, n)

    signal = 200 + 12 * oat + 1.5 * production + 3 * ahu
    base_rows = (idx >= BASELINE.bounds[0]) & (idx < BASELINE.bounds[1])
    rep_rows = np.asarray(idx >= REPORTING.bounds[0])
    var_sig = float(np.var(signal[base_rows]))
    noise_sd = np.sqrt(var_sig * (1 - target_r2) / target_r2)
    load = signal + rng.normal(0, noise_sd, n)
    step = step_fraction * float(np.mean(load[base_rows]))
    load = load - step * rep_rows

    frame = pd.DataFrame(
        {
            DEPENDENT: load,
            "weather-oat": oat,
            "line1-production": production,
            "ahu04-elec": ahu,
            "ahu05-elec": ahu_dup,
            "lab-humidity": 45 + _ar1(rng, n, 0.95, 8),
            "roof-wind": rng.gamma(2.0, 2.5, n),
            "office-lux": rng.uniform(100, 600, n),
            "pump2-vibration": 1 + np.abs(rng.normal(0, 0.3, n)),
            "tank-level": 60 + np.cumsum(rng.normal(0, 0.05, n)),
        },
        index=idx,
    )

    base_pos = np.flatnonzero(base_rows)
    # gaps and spikes in the baseline export only
    for col in frame.columns:
        share = duplicate_missing if col == "ahu05-elec" else missing_fraction
        hit = rng.choice(base_pos, size=int(share * base_pos.size), replace=False)
        frame.iloc[hit, frame.columns.get_loc(col)] = np.nan
    spikes = rng.choice(base_pos, size=int(outlier_fraction * base_pos.size), replace=False)
    frame.iloc[spikes, 0] = frame.iloc[spikes, 0].to_numpy() * 2

    manifest = {
        "site": SITE,
        "unit": "",
        "dependent": DEPENDENT,
        "columns": {
            DEPENDENT: {"equip": "chiller", "point": "elec", "unit": "kWh", "markers": ["energy"]},
            "weather-oat": {"equip": "weather", "point": "oat", "unit": "degC"},
            "line1-production": {"equip": "line1", "point": "production", "unit": "units"},
            "ahu04-elec": {"equip": "ahu04", "point": "elec", "unit": "kWh"},
            "ahu05-elec": {"equip": "ahu05", "point": "elec", "unit": "kWh"},
        },
    }
    config = {
        "ecm": "chiller plant sequencing upgrade",
        "boundary": "chilled water plant electrical supply",
        "baseline_period": BASELINE.as_dict(),
        "implementation_period": IMPLEMENTATION.as_dict(),
        "reporting_period": REPORTING.as_dict(),
        "dependent": f"{SITE}.chiller-elec",
        "static_factors": [{"name": "floor area", "description": "12,000 m2 serviced"}],
        "confidence": 0.68,
        "frequencies": ["15min", "hourly", "daily", "weekly"],
        "seed": int(seed),
    }
    return SyntheticFacility(
        frame=frame,
        manifest=manifest,
        config=config,
        step=step,
        true_savings=step * int(rep_rows.sum()),
        target_r2=target_r2,
    )
