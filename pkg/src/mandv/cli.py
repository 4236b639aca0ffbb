"""Command-line front end.

Every command reads a project config and writes into a stage directory
(``--out``). ``run.json`` in that directory records the seed, input hashes
and the files each stage produced; ``report`` refuses to run until
``baseline`` has recorded a winning model.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .core import Frequency, ProjectConfig, RawDataset, align, ingest_csv, read_stored_dataset, write_channel_metadata, write_csv
from .evaluation import ModelScore, required_cvrmse_curve, write_score_table
from .exceptions import MVError, StageError
from .models.persistence import dumps, load_model
from .models.search import FAMILIES
from .pipeline import run_baseline, run_report, select_with_quality
from .quality import assess
from .savings import acceptability_table, load_adjustments, range_rows, t_value, write_table

DATASET_CSV = "dataset.csv"
DATASET_META = "channels.json"
MANIFEST = "run.json"


def _sha(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dump_json(data, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


class Run:
    """The stage directory and its ``run.json`` manifest."""

    def __init__(self, out: Path):
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / MANIFEST
        self.data = json.loads(path.read_text()) if path.exists() else {"stages": {}}

    def record(self, stage: str, args, outputs, **extra) -> None:
        self.data["config"] = str(args.config)
        self.data["config_sha256"] = _sha(args.config)
        self.data["seed"] = args.seed_used
        inputs = {str(p): _sha(p) for p in (args.data, args.manifest) if p}
        entry = {
            "inputs": inputs,
            "outputs": {str(p.relative_to(self.out)): _sha(p) for p in sorted(outputs)},
            **extra,
        }
        self.data["stages"][stage] = entry
        _dump_json(self.data, self.out / MANIFEST)

    def stage(self, name: str) -> dict | None:
        return self.data["stages"].get(name)


def _config(args) -> ProjectConfig:
    cfg = ProjectConfig.load(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.frequencies:
        changes["frequencies"] = tuple(s.strip() for s in args.frequencies.split(",") if s.strip())
    if args.families:
        changes["families"] = tuple(s.strip() for s in args.families.split(",") if s.strip())
    if args.confidence is not None:
        changes["confidence_level"] = args.confidence
    cfg = replace(cfg, **changes) if changes else cfg
    args.seed_used = cfg.seed
    return cfg


def _dataset(args, run: Run) -> RawDataset:
    if args.data:
        if not args.manifest:
            raise MVError("--data needs --manifest")
        return ingest_csv(args.data, args.manifest)
    csv_path, meta = run.out / DATASET_CSV, run.out / DATASET_META
    if not csv_path.exists():
        raise StageError("ingest", "no stored dataset", "run `ingest` first or pass --data/--manifest")
    return read_stored_dataset(csv_path, meta)


def _model_order(frequency: str, family: str) -> tuple:
    """Finest frequency first, then the usual family order."""
    return Frequency.parse(frequency).duration, FAMILIES.index(family)


def _write_rows(rows, path: Path, fields=None) -> Path:
    rows = list(rows)
    fields = fields or (list(rows[0]) if rows else [])
    return write_table(rows, path, fields)


def cmd_ingest(args, run: Run) -> int:
    _config(args)
    if not args.data or not args.manifest:
        raise MVError("ingest needs --data and --manifest")
    ds = ingest_csv(args.data, args.manifest)
    outputs = [run.out / DATASET_CSV, run.out / DATASET_META, run.out / "channels.csv"]
    write_csv(ds, outputs[0])
    write_channel_metadata(ds, outputs[1])
    rows = []
    for c in ds.channels:
        rows.append(
            {
                "id": c.id,
                "source": c.source,
                "site": c.tags.site,
                "equip": c.tags.equip,
                "point": c.tags.point,
                "unit": c.unit,
                "points": len(c),
                "missing": int(np.isnan(c.values).sum()),
                "dependent": "yes" if c.id == ds.dependent_id else "",
            }
        )
    _write_rows(rows, outputs[2])
    run.record("ingest", args, outputs)
    print(f"ingested {len(ds)} channels at {ds.native_frequency} (dependent: {ds.dependent_id})")
    return 0


def _selection_outputs(run: Run, sel) -> list[Path]:
    out = [
        _write_rows(sel.report.to_rows(), run.out / "correlation.csv"),
        _dump_json({**sel.subset.to_dict(), "omitted": list(sel.omitted), "rounds": sel.rounds}, run.out / "features.json"),
    ]
    return out


def cmd_select_features(args, run: Run) -> int:
    cfg = _config(args)
    ds = _dataset(args, run)
    matrix = align(ds, cfg.baseline_period, cfg.check_dataset(ds))
    sel = select_with_quality(matrix)
    outputs = _selection_outputs(run, sel)
    run.record("select-features", args, outputs)
    print(f"selected {len(sel.subset)} features (adjusted R^2 {sel.subset.adjusted_r2:.4f}):")
    for f in sel.subset.selected:
        print(f"  {f}  VIF {sel.subset.vif.get(f, 1.0):.3f}")
    if sel.omitted:
        print("omitted for poor data quality: " + ", ".join(sel.omitted))
    return 0


def _assess_outputs(run: Run, summary, matrix) -> list[Path]:
    return [
        _write_rows(summary.to_rows(), run.out / "availability.csv"),
        _write_rows(summary.boxplot_rows(matrix), run.out / "boxplot.csv"),
    ]


def cmd_assess(args, run: Run) -> int:
    cfg = _config(args)
    ds = _dataset(args, run)
    matrix = align(ds, cfg.baseline_period, cfg.check_dataset(ds))
    features = None
    chosen = run.out / "features.json"
    if chosen.exists():
        features = json.loads(chosen.read_text())["selected"]
    summary = assess(matrix, features)
    outputs = _assess_outputs(run, summary, matrix)
    run.record("assess", args, outputs)
    for s in summary:
        print(f"{s.id}: missing {s.missing_count}, outliers {s.outlier_count}, poor {s.poor_quality_fraction:.2%}")
    return 0


def cmd_baseline(args, run: Run) -> int:
    cfg = _config(args)
    ds = _dataset(args, run)
    res = run_baseline(ds, cfg)
    outputs = _selection_outputs(run, res.selection)
    matrix = align(ds, cfg.baseline_period, cfg.check_dataset(ds))
    outputs += _assess_outputs(run, res.selection.summary, matrix)
    models_dir = run.out / "models"
    models_dir.mkdir(exist_ok=True)
    for stale in models_dir.glob("*.json"):
        stale.unlink()
    for m in res.models:
        path = models_dir / f"{m.label}.json"
        path.write_text(dumps(m))
        outputs.append(path)
    outputs.append(write_score_table(res.scores, run.out / "scores.csv"))
    outputs.append(_dump_json([s.to_dict() for s in res.scores], run.out / "scores.json"))
    winner = res.best.label
    outputs.append(_dump_json({"winner": winner, "score": res.best.to_dict()}, run.out / "winner.json"))
    failures = [list(f) for f in res.training.failures]
    run.record("baseline", args, outputs, winner=winner, model_file=f"models/{winner}.json", failures=failures)
    print(f"{len(res.models)} models trained")
    for s in sorted(res.scores, key=lambda s: _model_order(s.frequency.value, s.family)):
        mark = "  <- winner" if s.label == winner else ""
        print(f"  {s.label:16s} CV(RMSE) {s.cv_rmse_pct:8.3f}%  NMBE {s.nmbe_pct:8.3f}%{mark}")
    for freq, fam, err in failures:
        print(f"  {freq}-{fam} failed: {err}", file=sys.stderr)
    return 0


def _baseline_state(run: Run):
    stage = run.stage("baseline")
    if not stage or "winner" not in stage:
        raise StageError("report", "no winning model recorded", "run `baseline` first")
    model_file = run.out / stage["model_file"]
    recorded = stage["outputs"].get(stage["model_file"])
    if not model_file.exists() or recorded != _sha(model_file):
        raise StageError("report", f"winning model {model_file} is missing or modified", "re-run `baseline`")
    models = [load_model(run.out / rel) for rel in sorted(stage["outputs"]) if rel.startswith("models/")]
    scores = [ModelScore.from_dict(d) for d in json.loads((run.out / "scores.json").read_text())]
    return stage["winner"], models, scores


def cmd_report(args, run: Run) -> int:
    cfg = _config(args)
    winner, models, scores = _baseline_state(run)
    ds = _dataset(args, run)
    adjustments = load_adjustments(args.adjustments) if args.adjustments else []
    res = run_report(ds, cfg, models, scores, winner, adjustments)
    reports_dir = run.out / "reports"
    reports_dir.mkdir(exist_ok=True)
    outputs = []
    ordered = sorted(res.reports, key=lambda r: _model_order(r.frequency, r.family))
    for rep in ordered:
        outputs.append(_dump_json(rep.summary(), reports_dir / f"{rep.label}.json"))
    w = res.winner
    outputs.append(_dump_json({"winner": winner, **w.summary()}, run.out / "savings.json"))
    outputs.append(w.write_series(run.out / "savings_timeseries.csv"))
    fields = ["frequency", "family", "total_savings", "range_low", "range_high", "se_total", "acceptable"]
    outputs.append(_write_rows(range_rows(ordered), run.out / "savings_ranges.csv", fields))
    outputs.append(
        _write_rows(acceptability_table(ordered), run.out / "acceptability.csv", ["frequency", "family", "savings", "se", "acceptable"])
    )
    run.record("report", args, outputs, winner=winner)
    print(f"model {winner}: savings {w.total_savings:,.0f}")
    print(f"  range {w.range_low:,.0f} to {w.range_high:,.0f} @ {w.confidence:.0%} confidence (t = {w.t_value:.4f})")
    print(f"  standard error over the period {w.se_total:,.0f}; acceptable: {'Yes' if w.acceptable else 'No'}")
    for line in w.adjustments:
        print(f"  adjustment: {line}")
    for line in w.advisories:
        print(f"ADVISORY: {line}")
    return 0


def cmd_acceptability(args, run: Run) -> int:
    if args.input:
        with open(args.input, newline="") as fh:
            items = list(csv.DictReader(fh))
        out = run.out / "acceptability.csv"
    else:
        files = sorted((run.out / "reports").glob("*.json"))
        if not files:
            raise StageError("acceptability", "no savings reports found", "run `report` first or pass --input")
        items = []
        for f in files:
            d = json.loads(f.read_text())
            items.append({"frequency": d["frequency"], "family": d["family"], "savings": d["total_savings"], "se": d["se_total"]})
        items.sort(key=lambda r: _model_order(r["frequency"], r["family"]))
        out = run.out / "acceptability.csv"
    rows = acceptability_table(items)
    rows = [{**r, "savings": float(r["savings"]), "se": float(r["se"])} for r in rows]
    _write_rows(rows, out, ["frequency", "family", "savings", "se", "acceptable"])
    for r in rows:
        print(f"{r['frequency']:>8s} {r['family']:>6s} {r['savings']:>14,.0f} {r['se']:>14,.0f} {r['acceptable']}")
    print(f"{sum(r['acceptable'] == 'Yes' for r in rows)} of {len(rows)} acceptable")
    return 0


def cmd_required_performance(args, run: Run) -> int:
    confidence = args.confidence if args.confidence is not None else 0.68
    t = args.t if args.t is not None else t_value(confidence, args.df)
    if args.fractions:
        fractions = [float(x) for x in args.fractions.split(",")]
    else:
        fractions = [round(0.01 * i, 2) for i in range(1, 51)]
    curve = required_cvrmse_curve(fractions, t, args.n, args.m)
    rows = [
        {
            "fractional_savings": p.fraction,
            "cv_rmse_max_pct": p.cv_rmse_max_pct,
            "cv_rmse_max_ashrae_pct": "" if p.cv_rmse_max_ashrae_pct is None else p.cv_rmse_max_ashrae_pct,
        }
        for p in curve
    ]
    path = _write_rows(rows, run.out / "required_performance.csv")
    print(f"t = {t:.4f}; wrote {len(rows)} points to {path}")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "select-features": cmd_select_features,
    "assess": cmd_assess,
    "baseline": cmd_baseline,
    "report": cmd_report,
    "acceptability": cmd_acceptability,
    "required-performance": cmd_required_performance,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mandv", description="Measurement and verification of energy savings.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("mv-run"), help="stage output directory")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--confidence", type=float, default=None, help="confidence level in (0, 1)")
    common.add_argument("--frequencies", default=None, help="comma list, e.g. 15min,hourly,daily")
    common.add_argument("--families", default=None, help="comma list of ols,knn,ann,svm")
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--config", type=Path, required=True, help="project config (YAML)")
    data.add_argument("--data", type=Path, default=None, help="meter CSV export")
    data.add_argument("--manifest", type=Path, default=None, help="tag manifest (YAML)")
    for name in ("ingest", "select-features", "assess", "baseline"):
        sub.add_parser(name, parents=[common, data])
    rep = sub.add_parser("report", parents=[common, data])
    rep.add_argument("--adjustments", type=Path, default=None, help="non-routine adjustments (YAML)")
    acc = sub.add_parser("acceptability", parents=[common])
    acc.add_argument("--input", type=Path, default=None, help="CSV with frequency,family,savings,se")
    req = sub.add_parser("required-performance", parents=[common])
    req.add_argument("--t", type=float, default=None, help="t value (default from --confidence and --df)")
    req.add_argument("--df", type=float, default=30, help="degrees of freedom for t")
    req.add_argument("--fractions", default=None, help="comma list of fractional savings")
    req.add_argument("--n", type=int, default=None, help="baseline points (adds the fractional-savings formula column)")
    req.add_argument("--m", type=int, default=None, help="reporting points")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = Run(args.out)
        return COMMANDS[args.command](args, run)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MVError, OSError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
