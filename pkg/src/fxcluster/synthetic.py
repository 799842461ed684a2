"""Synthetic price panels for tests, benchmarks and the ``synth`` subcommand."""

from __future__ import annotations

from datetime import date, timedelta
from typing import Sequence

import numpy as np

from .ingest import AssetMeta, Dataset, NUMERAIRE_PER_UNIT, RateSeries


def date_axis(n: int, start: date = date(2000, 1, 1)) -> tuple[date, ...]:
    return tuple(start + timedelta(days=k) for k in range(n))


def prices_from_returns(returns, p0: float = 1.0) -> np.ndarray:
    """Price path whose successive log differences are ``returns``."""
    r = np.asarray(returns, dtype=float)
    return p0 * np.exp(np.concatenate([[0.0], np.cumsum(r)]))


def panel_from_returns(returns, codes: Sequence[str] | None = None, p0=None, start=date(2000, 1, 1)) -> Dataset:
    """Dataset from a returns array of shape (n_assets, T); prices have T + 1 dates."""
    returns = np.atleast_2d(np.asarray(returns, dtype=float))
    n, T = returns.shape
    codes = list(codes) if codes is not None else [f"A{k:03d}" for k in range(n)]
    p0 = np.ones(n) if p0 is None else np.broadcast_to(np.asarray(p0, dtype=float), (n,))
    axis = date_axis(T + 1, start)
    assets = [RateSeries(AssetMeta(c), axis, prices_from_returns(r, p)) for c, r, p in zip(codes, returns, p0)]
    return Dataset(tuple(assets), axis, numeraire="USD", orientation=NUMERAIRE_PER_UNIT)


def student_t(rng: np.random.Generator, df: float, size) -> np.ndarray:
    """Student-t draws scaled to unit variance (df > 2)."""
    return rng.standard_t(df, size) / np.sqrt(df / (df - 2))


def random_returns(n_assets: int, n_returns: int, seed: int = 0) -> np.ndarray:
    """Independent returns with a spread of tail weights and volatilities."""
    rng = np.random.default_rng(seed)
    out = np.empty((n_assets, n_returns))
    for k in range(n_assets):
        df = rng.uniform(2.5, 30.0)
        vol = rng.uniform(0.001, 0.02)
        out[k] = vol * student_t(rng, df, n_returns)
    return out


def random_panel(n_assets: int, n_dates: int, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed + 1)
    return panel_from_returns(random_returns(n_assets, n_dates - 1, seed), p0=rng.uniform(0.01, 100, n_assets))


def planted_returns(
    group_sizes: Sequence[int] = (10, 10),
    n_returns: int = 2000,
    seed: int = 0,
    dfs: Sequence[float | None] = (None, 3.0),
) -> tuple[np.ndarray, list[int]]:
    """Groups with distinct return distributions and known membership.

    Each group draws one base sample (normal for ``df=None``, Student-t
    otherwise). Every member is an independent time permutation of that
    sample under its own volatility and drift, so members share exactly one
    empirical distribution up to an affine map, which the normalization
    removes. Returns ``(returns, group_of_each_asset)``.
    """
    if len(dfs) < len(group_sizes):
        raise ValueError("need one tail parameter per group")
    rng = np.random.default_rng(seed)
    rows, truth = [], []
    for g, (size, df) in enumerate(zip(group_sizes, dfs)):
        base = rng.standard_normal(n_returns) if df is None else student_t(rng, df, n_returns)
        for _ in range(size):
            vol = rng.uniform(0.002, 0.02)
            drift = rng.uniform(-1e-4, 1e-4)
            rows.append(drift + vol * rng.permutation(base))
            truth.append(g)
    return np.vstack(rows), truth


def planted_panel(group_sizes=(10, 10), n_returns: int = 2000, seed: int = 0, dfs=(None, 3.0)):
    returns, truth = planted_returns(group_sizes, n_returns, seed, dfs)
    codes = [f"G{g}_{k:02d}" for k, g in enumerate(truth)]
    return panel_from_returns(returns, codes), dict(zip(codes, truth))
