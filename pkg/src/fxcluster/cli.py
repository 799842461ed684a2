"""Command line entry point.

Exit codes: 0 success, 2 input error, 3 numeric/degenerate error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import hcluster, ingest, metrics, pipeline, render, synthetic
from .errors import FxClusterError, InputError
from .hcluster import Dendrogram
from .metrics import DistanceMatrix
from .returns import dataset_returns

METRIC_FLAGS = {"js": metrics.JS_SQRT, "kurtosis": metrics.KURTOSIS_DELTA, "pearson": metrics.PEARSON}


def _dth(text: str):
    if text == "auto":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("threshold must be >= 0")
    return value


def _data_flags(p: argparse.ArgumentParser, defaults: bool = True):
    d = (lambda v: v) if defaults else (lambda v: None)
    p.add_argument("--input", required=defaults, help="rates CSV (wide or long layout)")
    p.add_argument("--meta", help="metadata CSV: code,name,regime,market_class,region,gdp_per_capita")
    p.add_argument("--align", choices=["intersect", "ffill"], default=d("intersect"))
    p.add_argument("--numeraire", default=d("USD"))
    p.add_argument("--orientation", choices=list(ingest.ORIENTATIONS))


def _metric_flags(p: argparse.ArgumentParser, defaults: bool = True):
    d = (lambda v: v) if defaults else (lambda v: None)
    p.add_argument("--metric", choices=list(METRIC_FLAGS), default=d("js"))
    p.add_argument("--bin-width", type=float, default=d(metrics.DEFAULT_BIN_WIDTH))
    p.add_argument("--dt", type=int, default=d(1), help="return horizon in rows")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fxcluster", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate, align and write a canonical wide CSV")
    _data_flags(p)
    p.add_argument("--bridge", help="CSV with new-numeraire per old-numeraire quotes")
    p.add_argument("--bridge-column")
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("distances", help="pairwise distance matrix")
    _data_flags(p)
    _metric_flags(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("cluster", help="agglomerate a distance matrix")
    p.add_argument("--input", required=True, help="distance matrix (.csv or .json)")
    p.add_argument("--linkage", choices=list(hcluster.LINKAGES), default="complete")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("cut", help="flat clusters from a dendrogram")
    p.add_argument("--input", required=True, help="dendrogram JSON")
    p.add_argument("--dth", type=_dth, default="auto")
    p.add_argument("--include-singletons", action="store_true")
    p.add_argument("--out", help="cluster assignment CSV")

    p = sub.add_parser("cdcc", help="cophenetic distance correlation of two dendrograms")
    p.add_argument("--input", required=True, nargs=2, metavar="DENDROGRAM_JSON")

    p = sub.add_parser("render", help="polar dendrogram SVG")
    p.add_argument("--input", required=True, help="dendrogram JSON")
    p.add_argument("--meta")
    p.add_argument("--dth", type=_dth, default="auto")
    p.add_argument("--out", required=True, help="output SVG path")

    p = sub.add_parser("run", help="full pipeline")
    p.add_argument("--config", help="key = value file; flags override it")
    _data_flags(p, defaults=False)
    _metric_flags(p, defaults=False)
    p.add_argument("--bridge")
    p.add_argument("--bridge-column")
    p.add_argument("--linkage", choices=list(hcluster.LINKAGES))
    p.add_argument("--periods", type=int)
    p.add_argument("--dth", type=_dth)
    p.add_argument("--skew-threshold", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-render", dest="render", action="store_const", const=False)
    p.add_argument("--out")

    p = sub.add_parser("synth", help="write a synthetic price panel")
    p.add_argument("--kind", choices=["random", "planted"], default="random")
    p.add_argument("--assets", type=int, default=20)
    p.add_argument("--dates", type=int, default=2001)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    return parser


def _load(args) -> ingest.Dataset:
    return ingest.load_dataset(
        args.input, args.align, args.meta, numeraire=args.numeraire, orientation=args.orientation
    )


def _read_matrix(path: str) -> DistanceMatrix:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {p}")
    if p.suffix == ".json":
        return DistanceMatrix.from_json(p)
    return DistanceMatrix.from_csv(p)


def _read_dendrogram(path: str) -> Dendrogram:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {p}")
    return Dendrogram.from_json(p)


def _cut(dg: Dendrogram, dth, include_singletons=False):
    if dth == "auto":
        return hcluster.best_threshold(dg, include_singletons)[1]
    return hcluster.cut(dg, dth)


def cmd_ingest(args):
    ds = _load(args)
    if args.bridge:
        ds = ingest.redenominate(ds, ingest.load_bridge(args.bridge, args.bridge_column))
    ingest.write_dataset(ds, args.out)
    print(f"{ds.n_assets} assets x {ds.n_dates} dates ({ds.numeraire}) -> {args.out}")


def cmd_distances(args):
    rs = dataset_returns(_load(args), args.dt)
    dm = metrics.distance_matrix(rs, METRIC_FLAGS[args.metric], args.bin_width)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dm.to_csv(out / "distances.csv")
    dm.to_json(out / "distances.json")
    print(f"{dm.metric} matrix {dm.n}x{dm.n} -> {out}")


def cmd_cluster(args):
    dg = hcluster.agglomerate(_read_matrix(args.input), args.linkage)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dg.to_json(out / "dendrogram.json")
    (out / "dendrogram.nwk").write_text(dg.to_newick() + "\n")
    print(f"{args.linkage} linkage, {dg.n} leaves, top height {dg.heights.max():.6g} -> {out}")


def cmd_cut(args):
    cc = _cut(_read_dendrogram(args.input), args.dth, args.include_singletons)
    if args.out:
        cc.to_csv(args.out)
    print(
        f"d_th={cc.threshold:.6g} clusters>=2: {cc.n_clusters_ge2} isolated: {cc.n_isolated}"
    )


def cmd_cdcc(args):
    a, b = (_read_dendrogram(p) for p in args.input)
    print(repr(hcluster.cdcc(a, b)))


def cmd_render(args):
    dg = _read_dendrogram(args.input)
    meta = ingest.read_metadata(args.meta) if args.meta else {}
    Path(args.out).write_text(render.render_polar(dg, _cut(dg, args.dth), meta))
    print(f"-> {args.out}")


def cmd_run(args):
    values = pipeline.read_config(args.config) if args.config else {}
    flags = {
        "input": args.input,
        "meta": args.meta,
        "align": args.align,
        "numeraire": args.numeraire,
        "orientation": args.orientation,
        "metric": METRIC_FLAGS.get(args.metric) if args.metric else None,
        "bin_width": args.bin_width,
        "dt_steps": args.dt,
        "bridge": args.bridge,
        "bridge_column": args.bridge_column,
        "linkage": args.linkage,
        "periods": args.periods,
        "dth": args.dth,
        "skew_threshold": args.skew_threshold,
        "workers": args.workers,
        "render": args.render,
        "out": args.out,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    cfg = pipeline.RunConfig.from_mapping(values)
    report = pipeline.run(cfg)
    for pr in report.periods:
        print(
            f"{pr.view} period {pr.index} [{pr.start}..{pr.stop}] d_th={pr.d_th:.4g} "
            f"clusters>=2: {pr.n_clusters_ge2} isolated: {pr.n_isolated}"
        )
    print(json.dumps(report.cdcc))
    print(f"-> {cfg.out}")


def cmd_synth(args):
    if args.kind == "planted":
        half = args.assets // 2
        ds, _ = synthetic.planted_panel((half, args.assets - half), args.dates - 1, args.seed)
    else:
        ds = synthetic.random_panel(args.assets, args.dates, args.seed)
    ingest.write_dataset(ds, args.out)
    print(f"{ds.n_assets} assets x {ds.n_dates} dates -> {args.out}")


COMMANDS = {
    "ingest": cmd_ingest,
    "distances": cmd_distances,
    "cluster": cmd_cluster,
    "cut": cmd_cut,
    "cdcc": cmd_cdcc,
    "render": cmd_render,
    "run": cmd_run,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except FxClusterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
