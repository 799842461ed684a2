"""Log returns, leave-one-out normalization and distribution moments."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSeries, InputError, SeriesTooShort
from .ingest import AssetMeta, Dataset, RateSeries

SIGMA_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """Returns of one asset.

    ``raw[t]`` is the log return ending at ``dates[t]``; ``normalized[t]`` is
    ``(raw[t] - mean) / loo_sigma[t]``.
    """

    asset: AssetMeta
    raw: np.ndarray
    mean: float
    loo_sigma: np.ndarray
    normalized: np.ndarray
    dates: tuple = ()

    @property
    def code(self) -> str:
        return self.asset.code

    def __len__(self):
        return len(self.raw)


def log_returns(series, dt_steps: int = 1) -> np.ndarray:
    """``ln P[t + dt_steps] - ln P[t]``; accepts a RateSeries or raw prices."""
    prices = series.prices if isinstance(series, RateSeries) else np.asarray(series, dtype=float)
    if dt_steps < 1:
        raise InputError("dt_steps must be a positive integer")
    if len(prices) <= dt_steps:
        raise SeriesTooShort(f"{len(prices)} prices cannot give returns over {dt_steps} steps")
    if np.any(prices <= 0):
        raise InputError("prices must be positive")
    logp = np.log(prices)
    return logp[dt_steps:] - logp[:-dt_steps]


def loo_volatility(raw, floor: float = SIGMA_FLOOR) -> tuple[float, np.ndarray]:
    """Full-sample mean and leave-one-out standard deviations.

    ``sigma[t] = sqrt(sum_{t' != t} (raw[t'] - mean)**2 / (T - 2))``. The mean
    is NOT leave-one-out. O(T): the excluded sum is the total minus one term.
    """
    x = np.asarray(raw, dtype=float)
    T = len(x)
    if T < 3:
        raise SeriesTooShort(f"need at least 3 returns, got {T}")
    mean = math.fsum(x) / T
    dev2 = (x - mean) ** 2
    total = math.fsum(dev2)
    excluded = np.maximum(total - dev2, 0.0)
    sigma = np.sqrt(excluded / (T - 2))
    if sigma.min() < floor:
        raise DegenerateSeries(f"leave-one-out volatility {sigma.min():.3g} below floor {floor:g}")
    return mean, sigma


def loo_volatility_naive(raw) -> np.ndarray:
    """O(T^2) reference: sums every t' != t explicitly."""
    x = [float(v) for v in raw]
    T = len(x)
    mean = math.fsum(x) / T
    return np.array(
        [math.sqrt(math.fsum((x[s] - mean) ** 2 for s in range(T) if s != t) / (T - 2)) for t in range(T)]
    )


def normalize(raw, floor: float = SIGMA_FLOOR) -> tuple[float, np.ndarray, np.ndarray]:
    """Return ``(mean, loo_sigma, normalized)``."""
    x = np.asarray(raw, dtype=float)
    mean, sigma = loo_volatility(x, floor)
    return mean, sigma, (x - mean) / sigma


def return_series(series: RateSeries, dt_steps: int = 1, floor: float = SIGMA_FLOOR) -> ReturnSeries:
    raw = log_returns(series, dt_steps)
    try:
        mean, sigma, r = normalize(raw, floor)
    except DegenerateSeries as exc:
        raise DegenerateSeries(f"{series.code}: {exc}") from None
    for arr in (raw, sigma, r):
        arr.setflags(write=False)
    return ReturnSeries(series.meta, raw, mean, sigma, r, tuple(series.dates[dt_steps:]))


def dataset_returns(ds: Dataset, dt_steps: int = 1, floor: float = SIGMA_FLOOR) -> list[ReturnSeries]:
    return [return_series(s, dt_steps, floor) for s in ds.assets]


def moments(values) -> tuple[float, float, float]:
    """Population variance, skewness ``m3/m2**1.5`` and non-excess kurtosis ``m4/m2**2``."""
    x = np.asarray(values, dtype=float)
    if len(x) < 4:
        raise SeriesTooShort(f"need at least 4 values, got {len(x)}")
    d = x - x.mean()
    m2 = np.mean(d**2)
    if not m2 > 0 or m2 < SIGMA_FLOOR**2 * max(1.0, np.mean(x**2)):
        raise DegenerateSeries("zero variance")
    m3 = np.mean(d**3)
    m4 = np.mean(d**4)
    return float(m2), float(m3 / m2**1.5), float(m4 / m2**2)


def write_returns(rs: ReturnSeries, path) -> Path:
    """Audit dump: ``date,raw,sigma,normalized``."""
    path = Path(path)
    dates = rs.dates or tuple(range(len(rs)))
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "raw", "sigma", "normalized"])
        for d, a, s, r in zip(dates, rs.raw, rs.loo_sigma, rs.normalized):
            w.writerow([getattr(d, "isoformat", lambda: d)(), repr(float(a)), repr(float(s)), repr(float(r))])
    return path
