from datetime import date

import numpy as np
import pytest

from fxcluster import ingest
from fxcluster.errors import (
    DuplicateDate,
    EmptyIntersection,
    InputError,
    MalformedRow,
    NonPositivePrice,
    OrientationUnknown,
)
from fxcluster.ingest import AssetMeta, CsvFormat, RateSeries, align, parse_rates, redenominate
from fxcluster.synthetic import random_panel

D = [date(2000, 1, k) for k in range(1, 8)]


def series(code, days, prices):
    return RateSeries(AssetMeta(code), days, prices)


def test_parse_three_rows(write_csv):
    (s,) = parse_rates(write_csv("date,AAA\n2000-01-01,1.0\n2000-01-02,2.0\n2000-01-03,4.0\n"))
    assert s.code == "AAA"
    assert s.prices.tolist() == [1.0, 2.0, 4.0]
    assert s.dates == tuple(D[:3])


def test_negative_price_reports_line(write_csv):
    with pytest.raises(NonPositivePrice) as info:
        parse_rates(write_csv("date,AAA\n2000-01-01,1.0\n2000-01-02,-2.0\n2000-01-03,4.0\n"))
    assert info.value.line == 3


@pytest.mark.parametrize(
    "body, line",
    [
        ("2000-01-01,1.0\n2000-13-02,2.0\n", 3),
        ("2000-01-01,1.0\n2000-01-02,abc\n", 3),
        ("2000-01-01,1.0,5\n", 2),
        ("2000-01-01,nan\n", 2),
    ],
)
def test_malformed_rows(write_csv, body, line):
    with pytest.raises(MalformedRow) as info:
        parse_rates(write_csv("date,AAA\n" + body))
    assert info.value.line == line


def test_duplicate_date(write_csv):
    with pytest.raises(DuplicateDate) as info:
        parse_rates(write_csv("date,AAA\n2000-01-01,1\n2000-01-02,2\n2000-01-01,3\n"))
    assert info.value.line == 4


def test_missing_cells_are_absent_dates(write_csv):
    a, b = parse_rates(write_csv("date,A,B\n2000-01-01,1,\n2000-01-02,2,5\n2000-01-03,,6\n"))
    assert a.dates == tuple(D[:2])
    assert b.dates == tuple(D[1:3])


def test_unsorted_rows_are_sorted(write_csv):
    (s,) = parse_rates(write_csv("date,A\n2000-01-03,3\n2000-01-01,1\n2000-01-02,2\n"))
    assert s.prices.tolist() == [1, 2, 3]


def test_long_layout_autodetected(write_csv):
    text = "date,asset,price\n2000-01-01,A,1\n2000-01-01,B,2\n2000-01-02,A,1.5\n2000-01-02,B,2.5\n"
    out = {s.code: s.prices.tolist() for s in parse_rates(write_csv(text))}
    assert out == {"A": [1, 1.5], "B": [2, 2.5]}


def test_selected_columns_and_delimiter(write_csv):
    text = "day;A;B\n2000-01-01;1;2\n2000-01-02;3;4\n"
    (s,) = parse_rates(write_csv(text), CsvFormat(date_column="day", price_columns=("B",), delimiter=";"))
    assert s.code == "B" and s.prices.tolist() == [2, 4]


def test_metadata_sidecar(write_csv):
    meta = ingest.read_metadata(
        write_csv(
            "code,name,regime,market_class,region,gdp_per_capita\n"
            "EUR,Euro,floating,developed,Europe,40000\n"
            "XOF,CFA franc,,frontier,Africa,\n",
            "meta.csv",
        )
    )
    assert meta["EUR"].gdp_per_capita == 40000 and meta["EUR"].regime == "floating"
    assert meta["XOF"].regime is None and meta["XOF"].gdp_per_capita is None
    with pytest.raises(MalformedRow):
        ingest.read_metadata(write_csv("code,gdp_per_capita\nA,-1\n", "bad.csv"))
    with pytest.raises(MalformedRow):
        ingest.read_metadata(write_csv("code,regime\nA,wobbly\n", "bad2.csv"))


def test_absent_metadata_defaults():
    m = AssetMeta("ABC")
    assert m.market_class == "unclassified" and m.region == "" and m.gdp_per_capita is None


def test_intersect_too_few_dates():
    a = series("A", D[0:3], [1, 2, 3])
    b = series("B", D[1:4], [1, 2, 3])
    with pytest.raises(EmptyIntersection):
        align([a, b], "intersect")


def test_intersect_common_dates():
    a = series("A", D[0:5], [1, 2, 3, 4, 5])
    b = series("B", D[1:6], [1, 2, 3, 4, 5])
    ds = align([a, b], "intersect")
    assert ds.date_axis == tuple(D[1:5])
    assert ds.assets[0].prices.tolist() == [2, 3, 4, 5]
    assert ds.assets[1].prices.tolist() == [1, 2, 3, 4]


def test_forward_fill():
    a = series("A", D[0:3], [1, 2, 3])
    b = series("B", [D[0], D[2]], [1, 3])
    c = series("C", D[0:3], [5, 6, 7])
    ds = align([a, b, c], "forward_fill")
    assert ds.assets[1].prices.tolist() == [1, 1, 3]


def test_forward_fill_truncates_leading_gap():
    a = series("A", D[0:5], [1, 2, 3, 4, 5])
    b = series("B", D[2:6], [7, 8, 9, 10])
    ds = align([a, b], "ffill")
    assert ds.date_axis == tuple(D[2:6])
    assert ds.assets[0].prices.tolist() == [3, 4, 5, 5]


def test_align_is_idempotent():
    ds = random_panel(4, 30, seed=3)
    again = align(list(ds.assets), "intersect", ds.numeraire, ds.orientation)
    assert again.same_as(ds)
    assert all(len(s.prices) == ds.n_dates for s in ds.assets)


def _usd_panel(orientation=ingest.NUMERAIRE_PER_UNIT):
    a = series("A", D[:5], [2.0, 2.2, 2.1, 2.5, 2.4])
    b = series("B", D[:5], [0.5, 0.6, 0.55, 0.52, 0.58])
    return align([a, b], "intersect", "USD", orientation)


def test_redenominate_identity_bridge():
    ds = _usd_panel()
    out = redenominate(ds, series("SDR", D[1:6], [1.0] * 5))
    assert out.date_axis == tuple(D[1:5])
    assert out.numeraire == "SDR"
    assert out.assets[0].prices.tolist() == ds.assets[0].prices[1:5].tolist()


def test_redenominate_unit_arithmetic():
    ds = _usd_panel()
    out = redenominate(ds, series("SDR", D[:5], [0.5] * 5))
    assert out.assets[0].prices[0] == 1.0


def test_redenominate_round_trip(rng):
    for orientation in ingest.ORIENTATIONS:
        ds = _usd_panel(orientation)
        b = rng.uniform(0.5, 2.0, 5)
        there = redenominate(ds, series("SDR", D[:5], b))
        back = redenominate(there, series("USD", D[:5], 1 / b))
        for x, y in zip(ds.assets, back.assets):
            np.testing.assert_allclose(y.prices, x.prices, rtol=1e-12, atol=0)


def test_redenominate_needs_orientation():
    ds = _usd_panel(None)
    with pytest.raises(OrientationUnknown):
        redenominate(ds, series("SDR", D[:5], [1.0] * 5))


def test_redenominate_needs_overlap():
    ds = _usd_panel()
    with pytest.raises(EmptyIntersection):
        redenominate(ds, series("SDR", D[3:7], [1.0] * 4))


def test_dataset_invariants():
    a = series("A", D[:3], [1, 2, 3])
    with pytest.raises(InputError):
        ingest.Dataset((a,), tuple(D[:3]))
    b = series("B", D[1:4], [1, 2, 3])
    with pytest.raises(InputError):
        ingest.Dataset((a, b), tuple(D[:3]))


def test_canonical_csv_round_trip(tmp_path):
    ds = random_panel(5, 40, seed=9)
    path = ingest.write_dataset(ds, tmp_path / "ds.csv")
    back = ingest.load_dataset(path, orientation=ds.orientation)
    assert back.same_as(ds)
    assert path.read_text() == ingest.write_dataset(back, tmp_path / "again.csv").read_text()


@pytest.mark.slow
def test_full_sized_file(tmp_path):
    ds = random_panel(75, 7416, seed=1)
    path = ingest.write_dataset(ds, tmp_path / "big.csv")
    back = ingest.load_dataset(path)
    assert back.n_assets == 75 and back.n_dates == 7416
