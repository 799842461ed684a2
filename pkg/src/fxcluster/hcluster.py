"""Agglomerative clustering, dendrogram cuts and dendrogram comparison.

Node ids follow the usual convention: leaves are ``0..N-1`` and the merge
made at step ``k`` creates node ``N + k``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import DegenerateHeights, InputError, InvalidMatrix, LabelMismatch
from .metrics import DistanceMatrix, pearson_correlation

LINKAGES = ("single", "complete", "average")
_LINKAGE_CODE = {"single": 0, "complete": 1, "average": 2}


class Merge(NamedTuple):
    left: int
    right: int
    height: float


@dataclass(frozen=True)
class Dendrogram:
    labels: tuple[str, ...]
    merges: tuple[Merge, ...]
    linkage: str = ""

    def __post_init__(self):
        labels = tuple(self.labels)
        merges = tuple(Merge(int(a), int(b), float(h)) for a, b, h in self.merges)
        n = len(labels)
        if n < 1:
            raise InputError("a dendrogram needs at least one leaf")
        if len(merges) != n - 1:
            raise InputError(f"{n} leaves need {n - 1} merges, got {len(merges)}")
        used = set()
        for step, (a, b, h) in enumerate(merges):
            for child in (a, b):
                if not 0 <= child < n + step:
                    raise InputError(f"merge {step} refers to unknown node {child}")
                if child in used:
                    raise InputError(f"node {child} merged twice")
                used.add(child)
            if a == b:
                raise InputError(f"merge {step} joins node {a} with itself")
            if not (math.isfinite(h) and h >= 0):
                raise InputError(f"merge {step} has invalid height {h}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "merges", merges)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def heights(self) -> np.ndarray:
        return np.array([m.height for m in self.merges])

    def node_height(self, node: int) -> float:
        return 0.0 if node < self.n else self.merges[node - self.n].height

    def members(self, node: int) -> list[int]:
        """Leaf indices under ``node``, left subtree first."""
        out, stack = [], [node]
        while stack:
            x = stack.pop()
            if x < self.n:
                out.append(x)
            else:
                m = self.merges[x - self.n]
                stack.extend((m.right, m.left))
        return out

    def leaf_order(self) -> list[int]:
        if self.n == 1:
            return [0]
        return self.members(2 * self.n - 2)

    def to_newick(self) -> str:
        """Newick string; a branch length is parent height minus child height."""
        if self.n == 1:
            return _newick_label(self.labels[0]) + ";"

        def render(node: int, parent_h: float) -> str:
            length = repr(parent_h - self.node_height(node))
            if node < self.n:
                return f"{_newick_label(self.labels[node])}:{length}"
            m = self.merges[node - self.n]
            return f"({render(m.left, m.height)},{render(m.right, m.height)}):{length}"

        root = self.merges[-1]
        return f"({render(root.left, root.height)},{render(root.right, root.height)});"

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "linkage": self.linkage,
            "merges": [{"left": m.left, "right": m.right, "height": m.height} for m in self.merges],
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=1)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_json(cls, source) -> "Dendrogram":
        obj = json.loads(Path(source).read_text() if isinstance(source, Path) else source)
        try:
            merges = [(m["left"], m["right"], m["height"]) for m in obj["merges"]]
            return cls(tuple(obj["labels"]), tuple(merges), obj.get("linkage", ""))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed dendrogram JSON: {exc}") from None


_NEWICK_SPECIAL = set(" \t\n()[]':;,")


def _newick_label(label: str) -> str:
    if any(c in _NEWICK_SPECIAL for c in label):
        return "'" + label.replace("'", "''") + "'"
    return label


def agglomerate(dm: DistanceMatrix, linkage: str = "complete") -> Dendrogram:
    """Merge the closest pair of clusters until one remains.

    Inter-cluster distance: minimum (single), maximum (complete) or mean over
    all cross pairs (average, i.e. UPGMA). Ties go to the lexicographically
    smallest node-id pair.
    """
    if linkage not in _LINKAGE_CODE:
        raise InputError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    if not isinstance(dm, DistanceMatrix):
        raise InvalidMatrix("expected a DistanceMatrix")
    if dm.n < 2:
        raise InvalidMatrix("need at least 2 items to cluster")
    children, heights = _kernels.agglomerate(np.ascontiguousarray(dm.values), _LINKAGE_CODE[linkage])
    merges = tuple(Merge(int(a), int(b), float(h)) for (a, b), h in zip(children, heights))
    return Dendrogram(dm.labels, merges, linkage)


@dataclass(frozen=True)
class ClusterCut:
    threshold: float
    assignment: dict
    n_clusters_ge2: int
    n_isolated: int

    @property
    def n_clusters(self) -> int:
        return self.n_clusters_ge2 + self.n_isolated

    def clusters(self) -> list[list[str]]:
        """Member labels per cluster id."""
        out: list[list[str]] = [[] for _ in range(self.n_clusters)]
        for label, cid in self.assignment.items():
            out[cid].append(label)
        return out

    def partition(self) -> set[frozenset]:
        return {frozenset(c) for c in self.clusters()}

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["label", "cluster_id"])
            for label, cid in self.assignment.items():
                w.writerow([label, cid])
        return path


def cut(dg: Dendrogram, d_th: float) -> ClusterCut:
    """Flat clusters from merges with height strictly below ``d_th``.

    Cluster ids are numbered by first appearance in label order.
    """
    n = dg.n
    parent = list(range(2 * n - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step, m in enumerate(dg.merges):
        if m.height < d_th:
            node = n + step
            parent[find(m.left)] = node
            parent[find(m.right)] = node
    ids: dict[int, int] = {}
    assignment = {}
    sizes: dict[int, int] = {}
    for leaf, label in enumerate(dg.labels):
        root = find(leaf)
        cid = ids.setdefault(root, len(ids))
        assignment[label] = cid
        sizes[cid] = sizes.get(cid, 0) + 1
    ge2 = sum(1 for s in sizes.values() if s >= 2)
    return ClusterCut(float(d_th), assignment, ge2, len(sizes) - ge2)


def candidate_thresholds(dg: Dendrogram) -> list[float]:
    """Midpoints between consecutive distinct merge heights, plus one above the top."""
    h = sorted(set(dg.heights.tolist()))
    if not h:
        return []
    mids = [(a + b) / 2 for a, b in zip(h, h[1:])]
    gap = h[-1] - h[-2] if len(h) > 1 else (h[-1] if h[-1] > 0 else 1.0)
    return mids + [h[-1] + gap / 2]


def best_threshold(dg: Dendrogram, include_singletons: bool = False) -> tuple[float, ClusterCut]:
    """Threshold giving the most clusters with at least two members.

    With ``include_singletons`` isolated leaves count as clusters too. Ties go
    to the smallest threshold.
    """
    best = None
    for c in candidate_thresholds(dg):
        cc = cut(dg, c)
        score = cc.n_clusters if include_singletons else cc.n_clusters_ge2
        if best is None or score > best[0]:
            best = (score, c, cc)
    if best is None:  # single leaf
        cc = cut(dg, 0.0)
        return 0.0, cc
    return best[1], best[2]


def cophenetic_matrix(dg: Dendrogram) -> DistanceMatrix:
    """Height of the merge where each pair of leaves first share a cluster."""
    n = dg.n
    coph = np.zeros((n, n))
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    for step, m in enumerate(dg.merges):
        a, b = members.pop(m.left), members.pop(m.right)
        coph[np.ix_(a, b)] = m.height
        coph[np.ix_(b, a)] = m.height
        members[n + step] = a + b
    return DistanceMatrix(dg.labels, coph, "cophenetic")


def cdcc(dg_a: Dendrogram, dg_b: Dendrogram) -> float:
    """Cophenetic distance correlation: Pearson correlation of the two trees'
    cophenetic distances over all leaf pairs, matched by label."""
    if set(dg_a.labels) != set(dg_b.labels) or dg_a.n != dg_b.n:
        raise LabelMismatch("dendrograms are over different label sets")
    if dg_a.n < 3:
        raise DegenerateHeights("need at least 3 leaves for a cophenetic correlation")
    ca = cophenetic_matrix(dg_a).condensed()
    cb = cophenetic_matrix(dg_b).reordered(dg_a.labels).condensed()
    for v in (ca, cb):
        if np.all(v == v[0]):
            raise DegenerateHeights("all cophenetic distances are equal")
    return pearson_correlation(ca, cb)


class MstReport(NamedTuple):
    passed: bool
    max_discrepancy: float
    mst_weights: tuple[float, ...]
    single_heights: tuple[float, ...]


def minimum_spanning_tree(dm: DistanceMatrix) -> list[tuple[int, int, float]]:
    """Prim's algorithm on the dense matrix; returns ``(i, j, weight)`` edges."""
    n = dm.n
    d = dm.values
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = d[0].copy()
    via = np.zeros(n, dtype=int)
    edges = []
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        k = int(np.argmin(cand))
        edges.append((int(via[k]), k, float(d[via[k], k])))
        in_tree[k] = True
        closer = d[k] < best
        best = np.where(closer, d[k], best)
        via = np.where(closer, k, via)
    return edges


def mst_check(dm: DistanceMatrix, tol: float = 1e-12) -> MstReport:
    """Compare sorted MST edge weights with sorted single-linkage merge heights."""
    weights = sorted(w for _, _, w in minimum_spanning_tree(dm))
    heights = sorted(agglomerate(dm, "single").heights.tolist())
    disc = max((abs(a - b) for a, b in zip(weights, heights)), default=0.0)
    return MstReport(disc <= tol, disc, tuple(weights), tuple(heights))


def rand_index(a: Sequence, b: Sequence) -> float:
    """Fraction of item pairs on which two labelings agree (same vs different cluster)."""
    if len(a) != len(b):
        raise InputError("labelings differ in length")
    n = len(a)
    if n < 2:
        return 1.0
    agree = 0
    for i in range(n):
        for j in range(i + 1, n):
            agree += (a[i] == a[j]) == (b[i] == b[j])
    return agree / (n * (n - 1) // 2)
