"""Polar dendrogram SVG.

Leaves sit on the outer circle in dendrogram order. A merge at height h is
drawn as an arc whose inward distance from the leaf circle is proportional
to h, so the root is the innermost arc. Branches inside a cluster of two or
more members (under the cut) share a palette colour; branches leading to
isolated leaves are black; the rest of the tree above the cut is grey.
Leaf labels are coloured by region and sized by log10 of GDP per capita.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping
from xml.sax.saxutils import escape, quoteattr

from .hcluster import ClusterCut, Dendrogram
from .ingest import AssetMeta

PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#17becf",
    "#bcbd22",
    "#7f7f7f",
)
ISOLATED_COLOR = "#000000"
UNCUT_COLOR = "#b0b0b0"

REGION_COLORS = {
    "americas": "black",
    "europe": "red",
    "middle east": "blue",
    "asia-pacific": "magenta",
    "africa": "green",
    "asia": "brown",
}
UNKNOWN_REGION_COLOR = "dimgray"

# label font size = FONT_BASE + FONT_PER_DECADE * log10(gdp); FONT_DEFAULT without gdp
FONT_BASE = 4.0
FONT_PER_DECADE = 2.0
FONT_DEFAULT = 9.0


def region_color(region: str) -> str:
    return REGION_COLORS.get((region or "").strip().lower(), UNKNOWN_REGION_COLOR)


def label_font_size(meta: AssetMeta | None) -> float:
    if meta is None or meta.gdp_per_capita is None:
        return FONT_DEFAULT
    return FONT_BASE + FONT_PER_DECADE * math.log10(meta.gdp_per_capita)


def _f(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def cluster_colors(cut: ClusterCut) -> dict[int, str]:
    """Palette colour per cluster id with two or more members, cycling the palette."""
    sizes: dict[int, int] = {}
    for cid in cut.assignment.values():
        sizes[cid] = sizes.get(cid, 0) + 1
    multi = sorted(cid for cid, s in sizes.items() if s >= 2)
    return {cid: PALETTE[k % len(PALETTE)] for k, cid in enumerate(multi)}


def render_polar(
    dg: Dendrogram,
    cut: ClusterCut,
    meta: Mapping[str, AssetMeta] | Iterable[AssetMeta] | None = None,
    size: int = 800,
    title: str | None = None,
) -> str:
    if meta is None:
        meta = {}
    elif not isinstance(meta, Mapping):
        meta = {m.code: m for m in meta}
    n = dg.n
    cx = cy = size / 2
    r_leaf = 0.36 * size
    r_root = 0.04 * size
    hmax = max(dg.heights.max(initial=0.0), 0.0)

    def radius(h: float) -> float:
        if hmax == 0:
            return r_leaf
        return r_leaf - (r_leaf - r_root) * h / hmax

    def point(r: float, theta: float) -> tuple[float, float]:
        return cx + r * math.cos(theta), cy + r * math.sin(theta)

    order = dg.leaf_order()
    angle: dict[int, float] = {leaf: 2 * math.pi * k / n for k, leaf in enumerate(order)}
    for step, m in enumerate(dg.merges):
        angle[n + step] = (angle[m.left] + angle[m.right]) / 2

    colors = cluster_colors(cut)
    leaf_cluster = [cut.assignment[lab] for lab in dg.labels]
    applied = [m.height < cut.threshold for m in dg.merges]

    def node_color(node: int) -> str:
        """Colour of the branch running up from ``node``."""
        if node < n:
            cid = leaf_cluster[node]
            return colors.get(cid, ISOLATED_COLOR)
        if applied[node - n]:
            return colors.get(leaf_cluster[dg.members(node)[0]], UNCUT_COLOR)
        return UNCUT_COLOR

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append('<rect width="100%" height="100%" fill="white"/>')
    out.append('<g fill="none" stroke-width="1.2" stroke-linecap="round">')

    for step, m in enumerate(dg.merges):
        node = n + step
        r = radius(m.height)
        for child in (m.left, m.right):
            child_h = dg.node_height(child)
            x1, y1 = point(radius(child_h), angle[child])
            x2, y2 = point(r, angle[child])
            leaf_attr = f" data-leaf={quoteattr(dg.labels[child])}" if child < n else ""
            out.append(
                f'<line class="branch" data-node="{child}"{leaf_attr} x1="{_f(x1)}" y1="{_f(y1)}" '
                f'x2="{_f(x2)}" y2="{_f(y2)}" stroke="{node_color(child)}"/>'
            )
        a0, a1 = sorted((angle[m.left], angle[m.right]))
        x1, y1 = point(r, a0)
        x2, y2 = point(r, a1)
        large = 1 if a1 - a0 > math.pi else 0
        out.append(
            f'<path class="arc" data-node="{node}" data-radius="{_f(r)}" '
            f'd="M {_f(x1)} {_f(y1)} A {_f(r)} {_f(r)} 0 {large} 1 {_f(x2)} {_f(y2)}" '
            f'stroke="{node_color(node)}"/>'
        )
    out.append("</g>")

    out.append('<g font-family="sans-serif" dominant-baseline="middle">')
    for leaf in order:
        label = dg.labels[leaf]
        m = meta.get(label)
        theta = angle[leaf]
        x, y = point(r_leaf + 6, theta)
        deg = math.degrees(theta)
        if math.cos(theta) < -1e-9:
            deg += 180
            anchor = "end"
        else:
            anchor = "start"
        out.append(
            f'<text class="leaf-label" data-leaf={quoteattr(label)} x="{_f(x)}" y="{_f(y)}" '
            f'font-size="{_f(label_font_size(m))}" fill="{region_color(m.region if m else "")}" '
            f'text-anchor="{anchor}" transform="rotate({_f(deg)} {_f(x)} {_f(y)})">{escape(label)}</text>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
