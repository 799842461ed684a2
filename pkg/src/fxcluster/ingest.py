"""Reading, validating, aligning and re-denominating daily price panels.

Two CSV layouts are accepted:

* wide: ``date,AAA,BBB,...`` with one price column per asset. An empty cell
  means the asset has no quote that day.
* long: ``date,asset,price`` with one row per quote. Detected from the header.

Prices are positive reals quoting either numeraire per asset unit (e.g. USD
per EUR) or asset units per numeraire. Which one is a dataset-level flag,
``Dataset.orientation``, needed only when re-denominating.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateDate,
    EmptyIntersection,
    InputError,
    MalformedRow,
    NonPositivePrice,
    OrientationUnknown,
)

REGIMES = ("floating", "fixed_peg", "crawling_peg", "horizontal_band")
MARKET_CLASSES = ("developed", "emerging", "frontier", "unclassified")

NUMERAIRE_PER_UNIT = "numeraire_per_unit"
UNIT_PER_NUMERAIRE = "unit_per_numeraire"
ORIENTATIONS = (NUMERAIRE_PER_UNIT, UNIT_PER_NUMERAIRE)

ALIGN_POLICIES = ("intersect", "forward_fill")

META_HEADER = ("code", "name", "regime", "market_class", "region", "gdp_per_capita")


@dataclass(frozen=True)
class AssetMeta:
    code: str
    name: str = ""
    regime: str | None = None
    market_class: str = "unclassified"
    region: str = ""
    gdp_per_capita: float | None = None

    def __post_init__(self):
        if not self.code:
            raise InputError("asset code must be non-empty")
        if self.regime is not None and self.regime not in REGIMES:
            raise InputError(f"{self.code}: unknown regime {self.regime!r}")
        if self.market_class not in MARKET_CLASSES:
            raise InputError(f"{self.code}: unknown market class {self.market_class!r}")
        if self.gdp_per_capita is not None and not self.gdp_per_capita > 0:
            raise InputError(f"{self.code}: gdp_per_capita must be > 0")


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RateSeries:
    meta: AssetMeta
    dates: tuple[date, ...]
    prices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "prices", _frozen(self.prices))
        if len(self.dates) != len(self.prices):
            raise InputError(f"{self.code}: {len(self.dates)} dates but {len(self.prices)} prices")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise InputError(f"{self.code}: dates are not strictly increasing")
        if self.prices.size and not (np.all(np.isfinite(self.prices)) and np.all(self.prices > 0)):
            raise InputError(f"{self.code}: prices must be finite and positive")

    @property
    def code(self) -> str:
        return self.meta.code

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True, eq=False)
class Dataset:
    assets: tuple[RateSeries, ...]
    date_axis: tuple[date, ...]
    numeraire: str = "USD"
    orientation: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "date_axis", tuple(self.date_axis))
        if len(self.assets) < 2:
            raise InputError("a dataset needs at least 2 assets")
        if len(self.date_axis) < 3:
            raise InputError("a dataset needs at least 3 dates")
        if self.orientation is not None and self.orientation not in ORIENTATIONS:
            raise InputError(f"unknown orientation {self.orientation!r}")
        codes = [s.code for s in self.assets]
        if len(set(codes)) != len(codes):
            raise InputError("asset codes must be unique within a dataset")
        for s in self.assets:
            if s.dates != self.date_axis:
                raise InputError(f"{s.code}: dates differ from the dataset date axis")

    @property
    def codes(self) -> list[str]:
        return [s.code for s in self.assets]

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    @property
    def n_dates(self) -> int:
        return len(self.date_axis)

    def price_matrix(self) -> np.ndarray:
        """Prices as an array of shape (n_assets, n_dates)."""
        return np.vstack([s.prices for s in self.assets])

    def window(self, start: int, stop: int) -> "Dataset":
        """Rows ``start:stop`` of the date axis as a new dataset."""
        axis = self.date_axis[start:stop]
        assets = [RateSeries(s.meta, axis, s.prices[start:stop]) for s in self.assets]
        return replace(self, assets=tuple(assets), date_axis=axis)

    def restrict(self, dates: Iterable[date]) -> "Dataset":
        """Keep only the axis dates that are in ``dates``."""
        wanted = set(dates)
        keep = np.array([d in wanted for d in self.date_axis])
        axis = tuple(d for d, k in zip(self.date_axis, keep) if k)
        if len(axis) < 3:
            raise EmptyIntersection(f"only {len(axis)} dates left after restriction")
        assets = [RateSeries(s.meta, axis, s.prices[keep]) for s in self.assets]
        return replace(self, assets=tuple(assets), date_axis=axis)

    def same_as(self, other: "Dataset") -> bool:
        return (
            self.numeraire == other.numeraire
            and self.orientation == other.orientation
            and self.date_axis == other.date_axis
            and [s.meta for s in self.assets] == [s.meta for s in other.assets]
            and all(np.array_equal(a.prices, b.prices) for a, b in zip(self.assets, other.assets))
        )


@dataclass(frozen=True)
class CsvFormat:
    """Column mapping for :func:`parse_rates`.

    ``price_columns=None`` takes every non-date column in wide layout.
    ``layout='auto'`` picks long layout when the header is exactly
    ``{date_column, asset_column, price_column}``.
    """

    date_column: str = "date"
    price_columns: tuple[str, ...] | None = None
    layout: str = "auto"
    delimiter: str = ","
    asset_column: str = "asset"
    price_column: str = "price"

    def __post_init__(self):
        if self.layout not in ("auto", "wide", "long"):
            raise InputError(f"unknown layout {self.layout!r}")


def _parse_date(text: str, line: int) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError:
        raise MalformedRow(line, f"unparsable date {text!r}") from None


def _parse_price(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(line, f"unparsable price {text!r} in column {column!r}") from None
    if math.isnan(value) or math.isinf(value):
        raise MalformedRow(line, f"non-finite price {text!r} in column {column!r}")
    if value <= 0:
        raise NonPositivePrice(line, column, value)
    return value


def _build_series(quotes: dict, meta: dict | None) -> list[RateSeries]:
    out = []
    for code, by_date in quotes.items():
        days = sorted(by_date)
        m = (meta or {}).get(code) or AssetMeta(code)
        out.append(RateSeries(m, days, [by_date[d] for d in days]))
    return out


def parse_rates(path, fmt: CsvFormat | None = None, meta: dict | None = None) -> list[RateSeries]:
    """Read a price CSV into one :class:`RateSeries` per asset.

    Raises MalformedRow, NonPositivePrice or DuplicateDate with the 1-based
    file line number (the header is line 1).
    """
    fmt = fmt or CsvFormat()
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=fmt.delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedRow(1, "empty file") from None
        if fmt.date_column not in header:
            raise MalformedRow(1, f"missing date column {fmt.date_column!r}")
        if len(set(header)) != len(header):
            raise MalformedRow(1, "duplicate column names")

        long_cols = {fmt.date_column, fmt.asset_column, fmt.price_column}
        layout = fmt.layout
        if layout == "auto":
            layout = "long" if set(header) == long_cols and len(header) == 3 else "wide"
        if layout == "long":
            return _parse_long(reader, header, fmt, meta)
        return _parse_wide(reader, header, fmt, meta)


def _parse_wide(reader, header, fmt, meta):
    di = header.index(fmt.date_column)
    if fmt.price_columns is None:
        columns = [h for h in header if h != fmt.date_column]
    else:
        missing = [c for c in fmt.price_columns if c not in header]
        if missing:
            raise MalformedRow(1, f"missing price columns {missing}")
        columns = list(fmt.price_columns)
    if not columns:
        raise MalformedRow(1, "no price columns")
    index = {c: header.index(c) for c in columns}
    quotes: dict[str, dict[date, float]] = {c: {} for c in columns}
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise MalformedRow(line, f"expected {len(header)} fields, got {len(row)}")
        day = _parse_date(row[di], line)
        for c in columns:
            cell = row[index[c]].strip()
            if not cell:
                continue
            if day in quotes[c]:
                raise DuplicateDate(line, c, day)
            quotes[c][day] = _parse_price(cell, line, c)
    return _build_series(quotes, meta)


def _parse_long(reader, header, fmt, meta):
    di = header.index(fmt.date_column)
    ai = header.index(fmt.asset_column)
    pi = header.index(fmt.price_column)
    quotes: dict[str, dict[date, float]] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise MalformedRow(line, f"expected {len(header)} fields, got {len(row)}")
        code = row[ai].strip()
        if not code:
            raise MalformedRow(line, "empty asset code")
        day = _parse_date(row[di], line)
        cell = row[pi].strip()
        if not cell:
            continue
        by_date = quotes.setdefault(code, {})
        if day in by_date:
            raise DuplicateDate(line, code, day)
        by_date[day] = _parse_price(cell, line, code)
    if not quotes:
        raise MalformedRow(1, "no quotes found")
    return _build_series(quotes, meta)


def read_metadata(path) -> dict[str, AssetMeta]:
    """Read the sidecar metadata CSV keyed by asset code."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    out: dict[str, AssetMeta] = {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "code" not in reader.fieldnames:
            raise MalformedRow(1, "metadata header must contain 'code'")
        for row in reader:
            line = reader.line_num
            code = (row.get("code") or "").strip()
            if not code:
                raise MalformedRow(line, "empty code")
            if code in out:
                raise MalformedRow(line, f"duplicate code {code!r}")
            gdp_text = (row.get("gdp_per_capita") or "").strip()
            try:
                gdp = float(gdp_text) if gdp_text else None
                out[code] = AssetMeta(
                    code=code,
                    name=(row.get("name") or "").strip(),
                    regime=(row.get("regime") or "").strip() or None,
                    market_class=(row.get("market_class") or "").strip() or "unclassified",
                    region=(row.get("region") or "").strip(),
                    gdp_per_capita=gdp,
                )
            except (ValueError, InputError) as exc:
                raise MalformedRow(line, str(exc)) from None
    return out


def attach_metadata(series: Iterable[RateSeries], meta: dict[str, AssetMeta]) -> list[RateSeries]:
    return [RateSeries(meta.get(s.code, s.meta), s.dates, s.prices) for s in series]


def align(
    series: Sequence[RateSeries],
    policy: str = "intersect",
    numeraire: str = "USD",
    orientation: str | None = None,
) -> Dataset:
    """Put every series on one common date axis.

    ``intersect`` keeps dates quoted by every series. ``forward_fill`` takes
    the union of dates, starting at the latest first quote so no series has a
    leading gap, and carries the last observed price across holes.
    """
    if policy == "ffill":
        policy = "forward_fill"
    if policy not in ALIGN_POLICIES:
        raise InputError(f"unknown align policy {policy!r}")
    series = list(series)
    if len(series) < 2:
        raise InputError("align needs at least 2 series")
    # forward fill can stretch a sparse series, so only intersect needs 3 quotes each
    need = 3 if policy == "intersect" else 1
    for s in series:
        if len(s) < need:
            raise InputError(f"{s.code}: fewer than {need} dates")

    if policy == "intersect":
        common = set(series[0].dates)
        for s in series[1:]:
            common.intersection_update(s.dates)
        axis = sorted(common)
        if len(axis) < 3:
            raise EmptyIntersection(f"only {len(axis)} common dates across {len(series)} series")
        aligned = []
        for s in series:
            keep = np.fromiter((d in common for d in s.dates), dtype=bool, count=len(s))
            aligned.append(RateSeries(s.meta, axis, s.prices[keep]))
    else:
        start = max(s.dates[0] for s in series)
        axis = sorted({d for s in series for d in s.dates if d >= start})
        if len(axis) < 3:
            raise EmptyIntersection(f"only {len(axis)} dates after the latest series start {start}")
        aligned = []
        for s in series:
            # index of the last quote on or before each axis date
            ords = np.array([d.toordinal() for d in s.dates])
            pos = np.searchsorted(ords, [d.toordinal() for d in axis], side="right") - 1
            aligned.append(RateSeries(s.meta, axis, s.prices[pos]))
    return Dataset(tuple(aligned), tuple(axis), numeraire=numeraire, orientation=orientation)


def redenominate(ds: Dataset, bridge: RateSeries, numeraire: str | None = None) -> Dataset:
    """Express ``ds`` in a new numeraire.

    ``bridge`` quotes new numeraire per old numeraire (e.g. SDR per USD).
    The dataset's quote orientation is preserved: numeraire-per-unit prices
    are multiplied by the bridge, unit-per-numeraire prices divided by it.
    The date axis becomes the intersection with the bridge dates.
    """
    if ds.orientation is None:
        raise OrientationUnknown("dataset orientation flag is unset; cannot re-denominate")
    bridge_px = dict(zip(bridge.dates, bridge.prices))
    keep = np.array([d in bridge_px for d in ds.date_axis])
    axis = tuple(d for d, k in zip(ds.date_axis, keep) if k)
    if len(axis) < 3:
        raise EmptyIntersection(f"only {len(axis)} dates shared with the bridge series")
    factor = np.array([bridge_px[d] for d in axis])
    assets = []
    for s in ds.assets:
        old = s.prices[keep]
        new = old * factor if ds.orientation == NUMERAIRE_PER_UNIT else old / factor
        assets.append(RateSeries(s.meta, axis, new))
    return Dataset(
        tuple(assets),
        axis,
        numeraire=numeraire or bridge.code,
        orientation=ds.orientation,
    )


def load_bridge(path, column: str | None = None, fmt: CsvFormat | None = None) -> RateSeries:
    """Read a single bridge series (new numeraire per old numeraire)."""
    series = parse_rates(path, fmt)
    if column is not None:
        hits = [s for s in series if s.code == column]
        if not hits:
            raise InputError(f"bridge column {column!r} not found in {path}")
        return hits[0]
    if len(series) != 1:
        raise InputError(f"bridge file {path} has {len(series)} series; name one with column=")
    return series[0]


def write_dataset(ds: Dataset, path) -> Path:
    """Write the canonical wide CSV (``repr`` floats, so it round-trips exactly)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *ds.codes])
        prices = ds.price_matrix()
        for t, d in enumerate(ds.date_axis):
            w.writerow([d.isoformat(), *(repr(float(x)) for x in prices[:, t])])
    return path


def write_metadata(meta: Iterable[AssetMeta], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(META_HEADER)
        for m in meta:
            gdp = "" if m.gdp_per_capita is None else repr(m.gdp_per_capita)
            w.writerow([m.code, m.name, m.regime or "", m.market_class, m.region, gdp])
    return path


def load_dataset(
    path,
    policy: str = "intersect",
    meta_path=None,
    numeraire: str = "USD",
    orientation: str | None = None,
    fmt: CsvFormat | None = None,
) -> Dataset:
    meta = read_metadata(meta_path) if meta_path else None
    return align(parse_rates(path, fmt, meta), policy, numeraire=numeraire, orientation=orientation)
