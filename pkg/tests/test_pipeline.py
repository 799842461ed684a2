import json

import numpy as np
import pytest

from fxcluster import ingest, pipeline
from fxcluster.errors import InputError, PipelineError, TooFewDates
from fxcluster.hcluster import agglomerate, rand_index
from fxcluster.metrics import DistanceMatrix, distance_matrix
from fxcluster.pipeline import RunConfig, analyze, run, skew_screen, split_periods
from fxcluster.returns import dataset_returns
from fxcluster.synthetic import date_axis, panel_from_returns, planted_panel, random_panel


def test_split_full_length():
    # floor(7416 / 4) = 1854 with no remainder
    ds = random_panel(2, 7416, seed=0)
    parts = split_periods(ds, 4)
    assert [p.n_dates for p in parts] == [1854] * 4
    assert pipeline.dropped_dates(7416, 4) == 0
    assert parts[1].date_axis[0] == ds.date_axis[1854]
    parts = split_periods(ds.window(0, 7416 - 3), 4)
    assert [p.n_dates for p in parts] == [1853] * 4 and pipeline.dropped_dates(7413, 4) == 1


def test_split_small():
    ds = random_panel(2, 10, seed=0)
    assert [p.n_dates for p in split_periods(ds, 3)] == [3, 3, 3]
    assert split_periods(ds, 1)[0] is ds
    with pytest.raises(TooFewDates):
        split_periods(ds, 4)


def test_skew_screen():
    x = np.random.default_rng(0).standard_normal((3, 400)) * 0.01
    x[1, 10] = 0.3
    x[2, 20] = -0.15
    rs = dataset_returns(panel_from_returns(x, ["N", "UP", "DN"]))
    assert skew_screen(rs, 1.0) == ["UP", "DN"]
    assert skew_screen(rs, 0) == ["UP", "DN", "N"]


def test_config_validation():
    with pytest.raises(InputError):
        RunConfig(linkage="ward")
    with pytest.raises(InputError):
        RunConfig(dth="high")
    assert RunConfig(align="ffill", metric="kurtosis").metric == "kurtosis_delta"


def test_config_file_and_mapping(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nlinkage = average\nperiods = 2\ndt = 5\nrender = no\ndth = 0.3\n")
    cfg = RunConfig.from_mapping(pipeline.read_config(path))
    assert (cfg.linkage, cfg.periods, cfg.dt_steps, cfg.render, cfg.dth) == ("average", 2, 5, False, 0.3)
    with pytest.raises(InputError):
        RunConfig.from_mapping({"bogus": "1"})


def test_single_period_matches_direct(tmp_path):
    ds = random_panel(6, 300, seed=3)
    run(RunConfig(out=str(tmp_path), render=False), {"USD": ds})
    got = DistanceMatrix.from_json(tmp_path / "USD" / "period_1" / "distances.json")
    want = distance_matrix(dataset_returns(ds))
    assert np.array_equal(got.values, want.values) and got.labels == want.labels


def test_two_periods_cdcc_table(tmp_path):
    report = run(RunConfig(out=str(tmp_path), periods=2, render=False), {"USD": random_panel(8, 401, seed=1)})
    table = report.cdcc["USD"]
    assert len(table) == 2 and table[0][0] == table[1][1] == 1.0
    assert table[0][1] == table[1][0] and -1 <= table[0][1] <= 1
    assert report.dropped_dates == 1


def test_planted_recovery():
    ds, truth = planted_panel(seed=0)
    comp = analyze(ds, RunConfig())
    a = comp.cut.assignment
    assert rand_index([a[c] for c in ds.codes], [truth[c] for c in ds.codes]) == 1.0


def test_deterministic_outputs(tmp_path):
    ds = random_panel(7, 250, seed=2)
    run(RunConfig(out=str(tmp_path / "a"), periods=2, workers=3), {"USD": ds})
    run(RunConfig(out=str(tmp_path / "b"), periods=2), {"USD": ds})
    a = json.loads((tmp_path / "a" / "manifest.json").read_text())
    b = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert a == b
    for entry in a["files"]:
        assert (tmp_path / "a" / entry["path"]).read_bytes() == (tmp_path / "b" / entry["path"]).read_bytes()
    assert {"USD/period_2/dendrogram.svg", "moments.csv", "report.json"} <= {e["path"] for e in a["files"]}


def test_bridge_views(tmp_path):
    ds = random_panel(5, 200, seed=4)
    data = tmp_path / "rates.csv"
    ingest.write_dataset(ds, data)
    days = date_axis(190, ds.date_axis[5])
    bridge = tmp_path / "sdr.csv"
    b = np.exp(np.cumsum(np.random.default_rng(0).standard_normal(190) * 0.003))
    bridge.write_text("date,SDR\n" + "".join(f"{d.isoformat()},{float(v)!r}\n" for d, v in zip(days, b)))
    cfg = RunConfig(
        input=str(data), bridge=str(bridge), orientation=ingest.NUMERAIRE_PER_UNIT,
        out=str(tmp_path / "out"), render=False,
    )
    views = pipeline.load_views(cfg)
    assert list(views) == ["USD", "SDR"]
    assert views["USD"].date_axis == views["SDR"].date_axis == days
    report = run(cfg, views)
    assert len(report.numeraire_cdcc) == 1


def test_missing_input_is_pipeline_error(tmp_path):
    with pytest.raises(PipelineError) as info:
        run(RunConfig(input=str(tmp_path / "none.csv"), out=str(tmp_path)))
    assert info.value.stage == "ingest" and info.value.exit_code == 2


def test_workers_do_not_change_dendrograms():
    ds = random_panel(9, 300, seed=6)
    dm = distance_matrix(dataset_returns(ds))
    assert analyze(ds, RunConfig(workers=4)).dg == agglomerate(dm, "complete")
