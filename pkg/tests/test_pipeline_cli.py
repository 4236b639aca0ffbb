from __future__ import annotations

import csv
import json

import pytest
import yaml

from conftest import REDUCED_GRID, cli_args, write_facility
from mandv.cli import main
from mandv.core import read_stored_dataset
from mandv.pipeline import run_baseline, run_report, select_with_quality
from mandv.core import align
from mandv.synthetic import make_facility


@pytest.fixture(scope="module")
def cli_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    fac, paths = write_facility(root / "input", frequencies=["hourly", "daily"])
    out = root / "run"
    codes = {}
    for cmd in ("ingest", "select-features", "assess", "baseline", "report"):
        codes[cmd] = main([cmd, *cli_args(paths, out)])
    codes["acceptability"] = main(["acceptability", "--out", str(out)])
    codes["required-performance"] = main(["required-performance", "--out", str(out), "--n", "100", "--m", "50"])
    return fac, paths, out, codes


def test_every_stage_succeeds(cli_run):
    *_, codes = cli_run
    assert all(code == 0 for code in codes.values()), codes


def test_stage_outputs_exist_and_are_recorded(cli_run):
    _, _, out, _ = cli_run
    manifest = json.loads((out / "run.json").read_text())
    for stage in ("ingest", "select-features", "assess", "baseline", "report"):
        assert stage in manifest["stages"]
        for rel in manifest["stages"][stage]["outputs"]:
            assert (out / rel).exists()
    for name in ("channels.csv", "correlation.csv", "availability.csv", "boxplot.csv", "scores.csv",
                 "savings.json", "savings_timeseries.csv", "savings_ranges.csv", "acceptability.csv",
                 "required_performance.csv"):
        assert (out / name).exists(), name
    assert len(list((out / "models").glob("*.json"))) == 8


def test_ingested_dataset_matches_source(cli_run):
    fac, _, out, _ = cli_run
    ds = read_stored_dataset(out / "dataset.csv", out / "channels.json")
    assert len(ds) == 10
    assert ds.dependent_id == "plantA.chiller-elec"


def test_acceptability_rows_follow_model_order(cli_run):
    _, _, out, _ = cli_run
    rows = list(csv.DictReader((out / "acceptability.csv").open()))
    assert [(r["frequency"], r["family"]) for r in rows] == [
        (f, m) for f in ("hourly", "daily") for m in ("ols", "knn", "ann", "svm")
    ]


def test_winner_savings_report(cli_run):
    fac, _, out, _ = cli_run
    rep = json.loads((out / "savings.json").read_text())
    assert rep["winner"] == json.loads((out / "winner.json").read_text())["winner"]
    assert rep["range_low"] < rep["total_savings"] < rep["range_high"]
    assert rep["df"] == rep["n_test"] - 1


def test_report_refuses_without_baseline(tmp_path):
    _, paths = write_facility(tmp_path / "in")
    assert main(["report", *cli_args(paths, tmp_path / "empty")]) == 1


def test_report_refuses_tampered_winner(cli_run, tmp_path, capsys):
    import shutil

    _, paths, out, _ = cli_run
    copy = tmp_path / "copy"
    shutil.copytree(out, copy)
    winner = json.loads((copy / "run.json").read_text())["stages"]["baseline"]["model_file"]
    with (copy / winner).open("a") as fh:
        fh.write(" ")
    assert main(["report", *cli_args(paths, copy)]) == 1
    assert "modified" in capsys.readouterr().err


def test_acceptability_from_csv(tmp_path, capsys):
    src = tmp_path / "in.csv"
    src.write_text("frequency,family,savings,se\ndaily,ols,10,4\ndaily,knn,10,5\n")
    assert main(["acceptability", "--input", str(src), "--out", str(tmp_path)]) == 0
    assert "1 of 2 acceptable" in capsys.readouterr().out


def test_required_performance_output(tmp_path):
    assert main(["required-performance", "--out", str(tmp_path), "--t", "1", "--fractions", "0.1,0.2"]) == 0
    rows = list(csv.DictReader((tmp_path / "required_performance.csv").open()))
    assert [float(r["cv_rmse_max_pct"]) for r in rows] == pytest.approx([5.0, 10.0])


def test_bad_config_exits_nonzero(tmp_path, capsys):
    cfg = tmp_path / "config.yaml"
    cfg.write_text(yaml.safe_dump({"ecm": "x"}))
    assert main(["baseline", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "error" in capsys.readouterr().err


def test_quality_omission_triggers_reselection():
    fac = make_facility(1, duplicate_missing=0.3)
    ds = fac.dataset()
    cfg = fac.project_config()
    matrix = align(ds, cfg.baseline_period, cfg.check_dataset(ds))
    sel = select_with_quality(matrix)
    assert all(f not in sel.subset.selected for f in sel.omitted)
    for s in sel.summary:
        assert s.poor_quality_fraction <= 0.05


def test_pipeline_in_memory_single_frequency():
    fac = make_facility(2)
    cfg = fac.project_config(frequencies=["daily"], grid=REDUCED_GRID)
    base = run_baseline(fac.dataset(), cfg)
    assert len(base.models) == 4
    rep = run_report(fac.dataset(), cfg, base.models, base.scores, base.best.label)
    assert len(rep.reports) == 4
    assert rep.winner.label == base.best.label
