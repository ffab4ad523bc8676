"""Gaussian market simulation with Kronecker serial correlation, plus the
empirical growth, Sharpe, and outperformance statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    HorizonTooShort,
    NotPositiveDefinite,
    ZeroVariancePath,
)
from .growth import relative_gap
from .market import AutocorrelationSpec, MarketMoments, Portfolio, validate

_MIN_SCENARIOS = 100
_SEED_LIMIT = 2**64


@dataclass(frozen=True)
class SimulationConfig:
    moments: MarketMoments
    spec: AutocorrelationSpec
    epsilon: float
    scenarios: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "scenarios", int(self.scenarios))
        object.__setattr__(self, "seed", int(self.seed))
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(
                f"epsilon must lie in (0, 1), got {self.epsilon}"
            )
        if self.scenarios < _MIN_SCENARIOS:
            raise ValueError(
                f"need at least {_MIN_SCENARIOS} scenarios, got "
                f"{self.scenarios}"
            )
        if not 0 <= self.seed < _SEED_LIMIT:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        validate(self.spec)

    @property
    def horizon(self) -> int:
        return self.spec.horizon


@dataclass(frozen=True)
class ReturnPaths:
    """Scenario tensor of decimal returns, shape K x T x N."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3:
            raise DimensionMismatch(
                f"paths must be a K x T x N tensor, got shape {v.shape}"
            )
        if not np.isfinite(v).all():
            raise ValueError("paths contain non-finite entries")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def scenarios(self) -> int:
        return self.values.shape[0]

    @property
    def horizon(self) -> int:
        return self.values.shape[1]

    @property
    def n_assets(self) -> int:
        return self.values.shape[2]


def _cholesky(mat: np.ndarray, label: str) -> np.ndarray:
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(
            f"{label} factor is not positive definite"
        ) from exc


def sample_paths(cfg: SimulationConfig) -> ReturnPaths:
    """Draw K independent paths from N(1 (x) mu, P (x) Sigma).

    The covariance is never materialized: with L_P = chol(P) and
    L_S = chol(Sigma), each path is mu + L_P Z L_S' for a T x N standard
    normal Z, which has exactly the Kronecker covariance in (t, asset)
    row-major layout.  Scenario k's stream depends only on (seed, k), so
    any execution order or degree of parallelism yields the same tensor.
    """
    T, N = cfg.horizon, cfg.moments.n_assets
    chol_p = _cholesky(cfg.spec.matrix(), "lag-profile")
    chol_s = _cholesky(cfg.moments.sigma, "covariance")
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.scenarios)
    z = np.empty((cfg.scenarios, T, N))
    for k, child in enumerate(children):
        z[k] = np.random.default_rng(child).standard_normal((T, N))
    paths = np.einsum("ij,kjl,ml->kim", chol_p, z, chol_s)
    paths += cfg.moments.mu
    return ReturnPaths(paths)


def _portfolio_series(paths: ReturnPaths, w: Portfolio) -> np.ndarray:
    if w.n_assets != paths.n_assets:
        raise DimensionMismatch(
            f"portfolio has {w.n_assets} weights, paths have "
            f"{paths.n_assets} assets"
        )
    return paths.values @ w.weights


def _order_statistic_index(epsilon: float, count: int) -> int:
    """ceil(epsilon * K), guarded against float noise at exact integers."""
    raw = epsilon * count
    nearest = round(raw)
    if nearest >= 1 and abs(raw - nearest) < 1e-9:
        return int(nearest)
    return max(int(math.ceil(raw)), 1)


def actual_growth_rate(
    paths: ReturnPaths, w: Portfolio, epsilon: float
) -> float:
    """Empirical shortfall growth rate: the ceil(eps K)-th smallest of the
    per-scenario quadratic growth averages."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    eta = _portfolio_series(paths, w)
    growth = (eta - 0.5 * eta * eta).mean(axis=1)
    kth = _order_statistic_index(epsilon, paths.scenarios)
    return float(np.partition(growth, kth - 1)[kth - 1])


def realized_sharpe(paths: ReturnPaths, w: Portfolio) -> np.ndarray:
    """Per-scenario mean over unbiased standard deviation of the portfolio
    return series."""
    if paths.horizon < 2:
        raise HorizonTooShort(
            f"sample deviation needs T >= 2, got T={paths.horizon}"
        )
    eta = _portfolio_series(paths, w)
    sd = eta.std(axis=1, ddof=1)
    flat = np.flatnonzero(sd == 0.0)
    if flat.size:
        raise ZeroVariancePath(
            f"scenario {flat[0]} has a constant return series"
        )
    return eta.mean(axis=1) / sd


def compare_strategies(
    paths: ReturnPaths, w_c: Portfolio, w_u: Portfolio, epsilon: float
) -> float:
    """Relative gap of the two empirical growth rates on one common path
    tensor, positive when the first portfolio does better."""
    g_c = actual_growth_rate(paths, w_c, epsilon)
    g_u = actual_growth_rate(paths, w_u, epsilon)
    return relative_gap(g_c, g_u)
