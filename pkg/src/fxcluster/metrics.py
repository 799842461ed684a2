"""Histograms on a shared grid and pairwise distance matrices.

All logarithms are natural, so the Jensen-Shannon divergence lies in
[0, ln 2] and the similarity distance sqrt(JS) in [0, sqrt(ln 2)]. Using
base 2 instead would rescale every distance and every cut threshold.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import (
    DegenerateSeries,
    GridMismatch,
    InputError,
    InvalidMatrix,
    LengthMismatch,
    NonPositiveBinWidth,
    NonPositiveKurtosis,
    UndefinedKL,
)
from .returns import ReturnSeries, moments

DEFAULT_BIN_WIDTH = 0.05
LN2 = math.log(2.0)

JS_SQRT = "js_sqrt"
KURTOSIS_DELTA = "kurtosis_delta"
PEARSON = "pearson"
METRICS = (JS_SQRT, KURTOSIS_DELTA, PEARSON)
_ALIASES = {"js": JS_SQRT, "kurtosis": KURTOSIS_DELTA, "correlation": PEARSON}


def metric_name(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in METRICS:
        raise InputError(f"unknown metric {name!r}; expected one of {METRICS}")
    return name


@dataclass(frozen=True, eq=False)
class Histogram:
    """Sparse histogram on the grid ``[origin + k*bin_width, origin + (k+1)*bin_width)``.

    Only occupied bins are stored: ``bins`` holds their sorted integer indices
    and ``probs`` the matching probabilities.
    """

    bin_width: float
    bins: np.ndarray
    probs: np.ndarray
    origin: float = 0.0

    def __post_init__(self):
        if not self.bin_width > 0:
            raise NonPositiveBinWidth(f"bin width must be > 0, got {self.bin_width}")
        bins = np.asarray(self.bins, dtype=np.int64)
        probs = np.asarray(self.probs, dtype=float)
        if bins.shape != probs.shape:
            raise InputError("bins and probs differ in length")
        if np.any(np.diff(bins) <= 0):
            raise InputError("bin indices must be strictly increasing")
        if np.any(probs < 0):
            raise InputError("probabilities must be non-negative")
        keep = probs > 0
        bins, probs = bins[keep], probs[keep]
        bins.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "bins", bins)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_dense(cls, probs, bin_width: float = DEFAULT_BIN_WIDTH, first_bin: int = 0) -> "Histogram":
        probs = np.asarray(probs, dtype=float)
        return cls(bin_width, np.arange(first_bin, first_bin + len(probs)), probs)

    @property
    def support(self) -> tuple[int, int]:
        """First and last occupied bin index."""
        return int(self.bins[0]), int(self.bins[-1])

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.bins.tolist(), self.probs.tolist()))

    def on(self, columns: np.ndarray) -> np.ndarray:
        """Probabilities laid out over the sorted bin indices ``columns``."""
        out = np.zeros(len(columns))
        out[np.searchsorted(columns, self.bins)] = self.probs
        return out

    def same_grid(self, other: "Histogram") -> bool:
        return self.bin_width == other.bin_width and self.origin == other.origin


def histogram(values, bin_width: float = DEFAULT_BIN_WIDTH) -> Histogram:
    """Bin ``values`` with ``floor(x / bin_width)`` on a grid anchored at 0."""
    if not bin_width > 0:
        raise NonPositiveBinWidth(f"bin width must be > 0, got {bin_width}")
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise InputError("cannot histogram an empty sample")
    if not np.all(np.isfinite(x)):
        raise InputError("values must be finite")
    idx = np.floor(x / bin_width).astype(np.int64)
    bins, counts = np.unique(idx, return_counts=True)
    return Histogram(bin_width, bins, counts / x.size)


def _check_grid(p: Histogram, q: Histogram):
    if not p.same_grid(q):
        raise GridMismatch(
            f"histograms on different grids (width {p.bin_width} vs {q.bin_width}, "
            f"origin {p.origin} vs {q.origin})"
        )


def _union_columns(hists: Sequence[Histogram]) -> np.ndarray:
    return np.unique(np.concatenate([h.bins for h in hists]))


def kl_divergence(p: Histogram, q: Histogram, smoothing: float = 0.0, strict: bool = True) -> float:
    """``sum p log(p/q)`` with ``0 log(0/q) = 0``.

    Where ``p > 0`` and ``q = 0`` the divergence is undefined: raises
    UndefinedKL, or returns ``inf`` with ``strict=False``. ``smoothing > 0``
    adds that mass to every bin in the joint support and renormalizes.
    """
    _check_grid(p, q)
    cols = _union_columns([p, q])
    a, b = p.on(cols), q.on(cols)
    if smoothing > 0:
        a = (a + smoothing) / (1 + smoothing * len(cols))
        b = (b + smoothing) / (1 + smoothing * len(cols))
    mass = a > 0
    if np.any(mass & (b == 0)):
        if strict:
            raise UndefinedKL("p has mass on bins where q has none")
        return math.inf
    a, b = a[mass], b[mass]
    return max(math.fsum((a * np.log(a / b)).tolist()), 0.0)


def js_divergence(p: Histogram, q: Histogram) -> float:
    """Jensen-Shannon divergence against the equal mixture; finite and symmetric."""
    _check_grid(p, q)
    cols = _union_columns([p, q])
    return float(_kernels.js_pair(p.on(cols), q.on(cols)))


def similarity_distance(p: Histogram, q: Histogram) -> float:
    return math.sqrt(js_divergence(p, q))


def kurtosis_distance(k_i: float, k_j: float) -> float:
    """Relative kurtosis difference ``|k_i - k_j| / mean(k_i, k_j)``."""
    if not (k_i > 0 and k_j > 0):
        raise NonPositiveKurtosis(f"kurtosis must be positive, got {k_i}, {k_j}")
    return abs(k_i - k_j) / ((k_i + k_j) / 2)


def _unit(x: np.ndarray) -> np.ndarray:
    c = x - x.mean()
    norm = math.sqrt(math.fsum((c * c).tolist()))
    if norm == 0 or norm < 1e-12 * max(1.0, float(np.abs(x).max())) * math.sqrt(len(x)):
        raise DegenerateSeries("constant series has no correlation")
    return c / norm


def pearson_distance(r_i, r_j) -> float:
    """``sqrt(2 (1 - C))`` with C the Pearson correlation.

    Computed as the Euclidean distance between the centred, unit-normalized
    series, which is the same quantity without the cancellation in ``1 - C``.
    """
    a = np.asarray(r_i, dtype=float)
    b = np.asarray(r_j, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"series lengths differ: {len(a)} vs {len(b)}")
    if len(a) < 3:
        raise LengthMismatch("need at least 3 observations")
    return _unit_distance(_unit(a), _unit(b))


def _unit_distance(ua: np.ndarray, ub: np.ndarray) -> float:
    diff = ua - ub
    return min(math.sqrt(math.fsum((diff * diff).tolist())), 2.0)


def pearson_correlation(r_i, r_j) -> float:
    return 1.0 - pearson_distance(r_i, r_j) ** 2 / 2.0


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    labels: tuple[str, ...]
    values: np.ndarray
    metric: str = JS_SQRT

    def __post_init__(self):
        labels = tuple(self.labels)
        v = np.array(self.values, dtype=float)
        n = len(labels)
        if v.shape != (n, n):
            raise InvalidMatrix(f"matrix shape {v.shape} does not match {n} labels")
        if len(set(labels)) != n:
            raise InvalidMatrix("labels must be unique")
        if not np.all(np.isfinite(v)):
            raise InvalidMatrix("matrix contains NaN or infinite values")
        if np.any(v < 0):
            raise InvalidMatrix("matrix has negative entries")
        if not np.array_equal(v, v.T):
            raise InvalidMatrix("matrix is not symmetric")
        if np.any(np.diag(v) != 0):
            raise InvalidMatrix("matrix diagonal must be zero")
        v.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return len(self.labels)

    def __getitem__(self, pair):
        i, j = pair
        if isinstance(i, str):
            i = self.labels.index(i)
        if isinstance(j, str):
            j = self.labels.index(j)
        return float(self.values[i, j])

    def condensed(self) -> np.ndarray:
        """Upper triangle in row-major order (``i < j``)."""
        return self.values[np.triu_indices(self.n, 1)]

    def lower_triangle(self) -> list[float]:
        """Strict lower triangle in row-major order (``i > j``)."""
        return self.values[np.tril_indices(self.n, -1)].tolist()

    def reordered(self, labels: Sequence[str]) -> "DistanceMatrix":
        idx = [self.labels.index(lab) for lab in labels]
        return DistanceMatrix(tuple(labels), self.values[np.ix_(idx, idx)], self.metric)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["", *self.labels])
            for lab, row in zip(self.labels, self.values):
                w.writerow([lab, *(repr(float(x)) for x in row)])
        return path

    @classmethod
    def from_csv(cls, path, metric: str = JS_SQRT) -> "DistanceMatrix":
        path = Path(path)
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if not rows:
            raise InvalidMatrix(f"{path} is empty")
        labels = tuple(rows[0][1:])
        if [r[0] for r in rows[1:]] != list(labels):
            raise InvalidMatrix("row labels do not match column labels")
        try:
            values = [[float(x) for x in r[1:]] for r in rows[1:]]
        except ValueError as exc:
            raise InvalidMatrix(str(exc)) from None
        return cls(labels, np.array(values), metric)

    def to_json(self, path=None) -> str:
        text = json.dumps(
            {"labels": list(self.labels), "metric": self.metric, "values": self.lower_triangle()}
        )
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_json(cls, source) -> "DistanceMatrix":
        obj = json.loads(Path(source).read_text() if isinstance(source, Path) else source)
        labels = tuple(obj["labels"])
        n = len(labels)
        lower = np.asarray(obj["values"], dtype=float)
        if lower.size != n * (n - 1) // 2:
            raise InvalidMatrix(f"expected {n * (n - 1) // 2} lower-triangle values, got {lower.size}")
        v = np.zeros((n, n))
        v[np.tril_indices(n, -1)] = lower
        return cls(labels, v + v.T, obj.get("metric", JS_SQRT))


def js_distance_matrix(hists: Sequence[Histogram], labels: Sequence[str]) -> DistanceMatrix:
    """sqrt(JS) between every pair of histograms, laid out on their joint bins."""
    if len(hists) < 2:
        raise InputError("need at least 2 histograms")
    for h in hists[1:]:
        _check_grid(hists[0], h)
    cols = _union_columns(hists)
    dense = np.ascontiguousarray(np.vstack([h.on(cols) for h in hists]))
    return DistanceMatrix(tuple(labels), np.sqrt(_kernels.js_matrix(dense)), JS_SQRT)


def _pairwise(items, fn) -> np.ndarray:
    n = len(items)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = fn(items[i], items[j])
    return out


def distance_matrix(
    returns: Sequence[ReturnSeries],
    metric: str = JS_SQRT,
    bin_width: float = DEFAULT_BIN_WIDTH,
) -> DistanceMatrix:
    """Pairwise distances between the normalized returns of every asset."""
    metric = metric_name(metric)
    if len(returns) < 2:
        raise InputError("need at least 2 return series")
    labels = tuple(r.code for r in returns)
    if metric == JS_SQRT:
        return js_distance_matrix([histogram(r.normalized, bin_width) for r in returns], labels)
    if metric == KURTOSIS_DELTA:
        kurt = [moments(r.normalized)[2] for r in returns]
        return DistanceMatrix(labels, _pairwise(kurt, kurtosis_distance), metric)
    lengths = {len(r) for r in returns}
    if len(lengths) != 1:
        raise LengthMismatch(f"return series lengths differ: {sorted(lengths)}")
    units = [_unit(np.asarray(r.normalized, dtype=float)) for r in returns]
    return DistanceMatrix(labels, _pairwise(units, _unit_distance), metric)
