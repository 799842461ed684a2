import json
import subprocess
import sys

import pytest

from fxcluster.cli import main


@pytest.fixture
def panel(tmp_path):
    path = tmp_path / "rates.csv"
    assert main(["synth", "--kind", "planted", "--assets", "8", "--dates", "301", "--out", str(path)]) == 0
    return path


def test_pipeline_of_subcommands(tmp_path, panel, capsys):
    out = tmp_path / "work"
    assert main(["ingest", "--input", str(panel), "--out", str(tmp_path / "canon.csv")]) == 0
    assert main(["distances", "--input", str(panel), "--metric", "js", "--out", str(out)]) == 0
    assert main(["cluster", "--input", str(out / "distances.json"), "--out", str(out)]) == 0
    assert main(["cluster", "--input", str(out / "distances.csv"), "--linkage", "single", "--out", str(out / "s")]) == 0
    dg = str(out / "dendrogram.json")
    assert main(["cut", "--input", dg, "--out", str(out / "clusters.csv")]) == 0
    assert main(["cut", "--input", dg, "--dth", "0.2"]) == 0
    assert main(["render", "--input", dg, "--out", str(out / "tree.svg")]) == 0
    capsys.readouterr()
    assert main(["cdcc", "--input", dg, dg]) == 0
    assert float(capsys.readouterr().out) == 1.0
    assert (out / "clusters.csv").read_text().startswith("label,cluster_id\n")
    assert (out / "tree.svg").read_text().startswith("<?xml")


def test_run_with_config_override(tmp_path, panel, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"input = {panel}\nperiods = 3\nlinkage = single\nout = {tmp_path / 'ignored'}\n")
    assert main(["run", "--config", str(cfg), "--periods", "2", "--no-render", "--out", str(tmp_path / "o")]) == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["config"]["periods"] == 2 and report["config"]["linkage"] == "single"
    assert not (tmp_path / "ignored").exists()
    assert "USD period 2" in capsys.readouterr().out


@pytest.mark.parametrize("metric", ["js", "kurtosis", "pearson"])
def test_metric_flags(tmp_path, panel, metric):
    assert main(["distances", "--input", str(panel), "--metric", metric, "--out", str(tmp_path)]) == 0
    assert (tmp_path / "distances.csv").exists()


def test_input_errors_exit_2(tmp_path, capsys):
    assert main(["distances", "--input", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("date,A,B\n2000-01-01,1,2\n2000-01-02,-1,2\n2000-01-03,1,2\n")
    assert main(["ingest", "--input", str(bad), "--out", str(tmp_path / "x.csv")]) == 2
    assert "line 3" in capsys.readouterr().err
    assert main(["run", "--input", str(bad), "--out", str(tmp_path / "r")]) == 2


def test_numeric_errors_exit_3(tmp_path):
    flat = tmp_path / "flat.csv"
    flat.write_text("date,A,B\n" + "".join(f"2000-01-{d:02d},1.5,{1 + d % 3}\n" for d in range(1, 11)))
    assert main(["distances", "--input", str(flat), "--out", str(tmp_path)]) == 3
    assert main(["run", "--input", str(flat), "--out", str(tmp_path / "r")]) == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "fxcluster", "synth", "--assets", "3", "--dates", "20", "--out", str(tmp_path / "s.csv")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "3 assets x 20 dates" in proc.stdout
