"""End-to-end runs: load, window, measure, cluster, cut, compare, write.

Outputs land under ``RunConfig.out``::

    <out>/<numeraire>/period_<k>/distances.csv|json, dendrogram.json|nwk,
                                 clusters.csv, dendrogram.svg
    <out>/moments.csv, report.json, manifest.json

``manifest.json`` lists every other output with its SHA-256. Nothing written
depends on wall-clock time, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import hcluster, ingest, metrics, render
from .errors import FxClusterError, InputError, PipelineError, TooFewDates
from .hcluster import ClusterCut, Dendrogram
from .ingest import Dataset
from .metrics import DistanceMatrix
from .returns import ReturnSeries, dataset_returns, moments

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    input: str | None = None
    meta: str | None = None
    bridge: str | None = None
    bridge_column: str | None = None
    align: str = "intersect"
    dt_steps: int = 1
    bin_width: float = metrics.DEFAULT_BIN_WIDTH
    metric: str = metrics.JS_SQRT
    linkage: str = "complete"
    periods: int = 1
    dth: float | str = "auto"
    out: str = "out"
    render: bool = True
    numeraire: str = "USD"
    orientation: str | None = None
    skew_threshold: float = 1.0
    include_singletons: bool = False
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        self.metric = metrics.metric_name(self.metric)
        if self.align == "ffill":
            self.align = "forward_fill"
        if self.align not in ingest.ALIGN_POLICIES:
            raise InputError(f"unknown align policy {self.align!r}")
        if self.linkage not in hcluster.LINKAGES:
            raise InputError(f"unknown linkage {self.linkage!r}")
        if int(self.periods) < 1:
            raise InputError("periods must be >= 1")
        if int(self.dt_steps) < 1:
            raise InputError("dt steps must be >= 1")
        if not float(self.bin_width) > 0:
            raise InputError("bin width must be > 0")
        if self.dth != "auto":
            try:
                self.dth = float(self.dth)
            except (TypeError, ValueError):
                raise InputError(f"threshold must be 'auto' or a number, got {self.dth!r}") from None
            if self.dth < 0:
                raise InputError("fixed threshold must be >= 0")
        if self.orientation is not None and self.orientation not in ingest.ORIENTATIONS:
            raise InputError(f"unknown orientation {self.orientation!r}")
        if self.skew_threshold < 0:
            raise InputError("skew threshold must be >= 0")
        if int(self.workers) < 1:
            raise InputError("workers must be >= 1")

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        """Build from string-valued keys as found in a config file or on the CLI."""
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for raw_key, value in values.items():
            key = raw_key.strip().replace("-", "_")
            key = {"dt": "dt_steps"}.get(key, key)
            if key not in known:
                raise InputError(f"unknown config key {raw_key!r}")
            kwargs[key] = _coerce(key, value)
        return cls(**kwargs)


_INT_KEYS = {"dt_steps", "periods", "workers"}
_FLOAT_KEYS = {"bin_width", "skew_threshold"}
_BOOL_KEYS = {"render", "include_singletons"}


def _coerce(key, value):
    if not isinstance(value, str):
        return value
    value = value.strip()
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise InputError(f"config key {key!r}: bad value {value!r}") from None
    if key in _BOOL_KEYS:
        low = value.lower()
        if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
            raise InputError(f"config key {key!r}: bad boolean {value!r}")
        return low in ("1", "true", "yes", "on")
    return value or None if key in ("meta", "bridge", "bridge_column", "orientation") else value


def read_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment. Keys mirror the CLI flags."""
    out = {}
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such config file: {path}")
    for n, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{n}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def split_periods(ds: Dataset, k: int) -> list[Dataset]:
    """``k`` contiguous, equal, non-overlapping windows of ``floor(tau/k)`` dates.

    The ``tau mod k`` trailing dates are dropped (see :func:`dropped_dates`).
    """
    if k < 1:
        raise InputError("number of periods must be >= 1")
    if k == 1:
        return [ds]
    tau = ds.n_dates
    if tau < 3 * k:
        raise TooFewDates(f"{tau} dates cannot form {k} periods of at least 3 dates")
    w = tau // k
    if tau % k:
        log.info("dropping %d trailing dates to form %d periods of %d", tau % k, k, w)
    return [ds.window(i * w, (i + 1) * w) for i in range(k)]


def dropped_dates(tau: int, k: int) -> int:
    return 0 if k == 1 else tau % k


def skew_screen(returns: Sequence[ReturnSeries], threshold: float) -> list[str]:
    """Assets whose |skewness| exceeds ``threshold``, most skewed first.

    A zero threshold lists every asset.
    """
    if threshold < 0:
        raise InputError("skew threshold must be >= 0")
    skews = [(abs(moments(r.normalized)[1]), r.code) for r in returns]
    hits = [(s, c) for s, c in skews if threshold == 0 or s > threshold]
    return [c for s, c in sorted(hits, key=lambda sc: (-sc[0], sc[1]))]


@dataclass
class PeriodResult:
    view: str
    index: int
    start: str
    stop: str
    n_dates: int
    d_th: float
    n_clusters_ge2: int
    n_isolated: int
    clusters: list[list[str]]
    paths: dict[str, str] = field(default_factory=dict)


@dataclass
class RunReport:
    config: dict
    n_assets: int
    n_dates: int
    dropped_dates: int
    periods: list[PeriodResult]
    cdcc: dict[str, list[list[float | None]]]
    numeraire_cdcc: list[float | None]
    moments: dict[str, dict[str, float]]
    skew_outliers: list[str]
    manifest: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class _Computed:
    dm: DistanceMatrix
    dg: Dendrogram
    cut: ClusterCut
    returns: list[ReturnSeries]


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except FxClusterError as exc:
        raise PipelineError(name, exc) from exc


def analyze(ds: Dataset, cfg: RunConfig) -> _Computed:
    """Returns, distances, dendrogram and cut for one dataset window."""
    rs = _stage("returns", dataset_returns, ds, cfg.dt_steps)
    dm = _stage("distances", metrics.distance_matrix, rs, cfg.metric, cfg.bin_width)
    dg = _stage("cluster", hcluster.agglomerate, dm, cfg.linkage)
    if cfg.dth == "auto":
        _, cc = _stage("cut", hcluster.best_threshold, dg, cfg.include_singletons)
    else:
        cc = _stage("cut", hcluster.cut, dg, float(cfg.dth))
    return _Computed(dm, dg, cc, rs)


def load_views(cfg: RunConfig) -> dict[str, Dataset]:
    """The dataset in its own numeraire and, with a bridge, re-denominated on the shared dates."""
    if not cfg.input:
        raise PipelineError("ingest", InputError("no input file given"))
    ds = _stage(
        "ingest",
        ingest.load_dataset,
        cfg.input,
        cfg.align,
        cfg.meta,
        numeraire=cfg.numeraire,
        orientation=cfg.orientation,
    )
    if not cfg.bridge:
        return {ds.numeraire: ds}
    bridge = _stage("ingest", ingest.load_bridge, cfg.bridge, cfg.bridge_column)
    alt = _stage("redenominate", ingest.redenominate, ds, bridge)
    if alt.numeraire == ds.numeraire:
        raise PipelineError("redenominate", InputError("bridge numeraire equals the dataset numeraire"))
    base = ds.restrict(alt.date_axis)
    return {base.numeraire: base, alt.numeraire: alt}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _cdcc_or_none(a: Dendrogram, b: Dendrogram) -> float | None:
    try:
        return hcluster.cdcc(a, b)
    except FxClusterError:
        return None


def _write_moments(path: Path, returns: Sequence[ReturnSeries]) -> dict:
    table = {}
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["code", "variance", "skewness", "kurtosis"])
        for r in returns:
            var, skew, kurt = moments(r.normalized)
            table[r.code] = {"variance": var, "skewness": skew, "kurtosis": kurt}
            w.writerow([r.code, repr(var), repr(skew), repr(kurt)])
    return table


def run(cfg: RunConfig, views: dict[str, Dataset] | None = None) -> RunReport:
    """Run the whole pipeline; ``views`` overrides file loading (numeraire -> dataset)."""
    cfg.validate()
    if views is None:
        views = load_views(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    first = next(iter(views.values()))
    tasks = []
    for name, ds in views.items():
        windows = _stage("split", split_periods, ds, cfg.periods)
        tasks.extend((name, k, w) for k, w in enumerate(windows, start=1))

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        computed = list(pool.map(lambda t: analyze(t[2], cfg), tasks))

    written: list[Path] = []
    results: list[PeriodResult] = []
    trees: dict[str, list[Dendrogram]] = {name: [] for name in views}
    for (name, k, window), comp in zip(tasks, computed):
        pdir = out / name / f"period_{k}"
        pdir.mkdir(parents=True, exist_ok=True)
        paths = {
            "distances_csv": comp.dm.to_csv(pdir / "distances.csv"),
            "distances_json": pdir / "distances.json",
            "dendrogram_json": pdir / "dendrogram.json",
            "newick": pdir / "dendrogram.nwk",
            "clusters": comp.cut.to_csv(pdir / "clusters.csv"),
        }
        comp.dm.to_json(paths["distances_json"])
        comp.dg.to_json(paths["dendrogram_json"])
        paths["newick"].write_text(comp.dg.to_newick() + "\n")
        if cfg.render:
            meta = {s.code: s.meta for s in window.assets}
            svg = _stage("render", render.render_polar, comp.dg, comp.cut, meta,
                         title=f"{name} period {k} ({cfg.metric}, {cfg.linkage})")
            paths["svg"] = pdir / "dendrogram.svg"
            paths["svg"].write_text(svg)
        written.extend(paths.values())
        trees[name].append(comp.dg)
        results.append(
            PeriodResult(
                view=name,
                index=k,
                start=window.date_axis[0].isoformat(),
                stop=window.date_axis[-1].isoformat(),
                n_dates=window.n_dates,
                d_th=comp.cut.threshold,
                n_clusters_ge2=comp.cut.n_clusters_ge2,
                n_isolated=comp.cut.n_isolated,
                clusters=comp.cut.clusters(),
                paths={key: p.relative_to(out).as_posix() for key, p in paths.items()},
            )
        )

    cdcc_tables = {}
    for name, dgs in trees.items():
        table = [[1.0 if i == j else None for j in range(len(dgs))] for i in range(len(dgs))]
        for i in range(len(dgs)):
            for j in range(i + 1, len(dgs)):
                table[i][j] = table[j][i] = _cdcc_or_none(dgs[i], dgs[j])
        cdcc_tables[name] = table
    names = list(trees)
    numeraire_cdcc = []
    if len(names) == 2:
        numeraire_cdcc = [_cdcc_or_none(a, b) for a, b in zip(trees[names[0]], trees[names[1]])]

    full_returns = _stage("returns", dataset_returns, first, cfg.dt_steps)
    moments_path = out / "moments.csv"
    moment_table = _stage("moments", _write_moments, moments_path, full_returns)
    written.append(moments_path)
    outliers = _stage("skew", skew_screen, full_returns, cfg.skew_threshold)

    report = RunReport(
        config={k: v for k, v in asdict(cfg).items() if k not in ("workers", "out")},
        n_assets=first.n_assets,
        n_dates=first.n_dates,
        dropped_dates=dropped_dates(first.n_dates, cfg.periods),
        periods=results,
        cdcc=cdcc_tables,
        numeraire_cdcc=numeraire_cdcc,
        moments=moment_table,
        skew_outliers=outliers,
        manifest="manifest.json",
    )
    report_path = out / "report.json"
    report_path.write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    written.append(report_path)

    manifest = {
        "files": [{"path": p.relative_to(out).as_posix(), "sha256": _sha256(p)} for p in sorted(written)],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return report


def cdcc_table(dendrograms: Sequence[Dendrogram]) -> np.ndarray:
    n = len(dendrograms)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = hcluster.cdcc(dendrograms[i], dendrograms[j])
    return out
