"""Benchmark market calibration: the 10 industry portfolios, monthly,
January 2003 through December 2012.

Published summary statistics cover only the per-asset means and standard
deviations, so the cross-correlations here are synthetic: a single
equicorrelation of 0.68, a typical magnitude for monthly US industry
returns over this decade.  They are a modeling choice, not estimates
from the dataset.
The packaged CSV is likewise synthetic, drawn once from a Gaussian and
affinely corrected so its sample moments reproduce this calibration
exactly despite the finite sample.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .market import MarketMoments

INDUSTRY_LABELS = (
    "NoDur",
    "Durbl",
    "Manuf",
    "Enrgy",
    "HiTec",
    "Telcm",
    "Shops",
    "Hlth",
    "Utils",
    "Other",
)

INDUSTRY_MEAN_PERCENT = (
    0.85, 0.75, 0.98, 1.25, 0.87, 0.76, 0.89, 0.65, 0.98, 0.45,
)

INDUSTRY_STD_PERCENT = (
    3.44, 8.53, 5.41, 6.19, 5.52, 4.66, 4.24, 3.66, 3.79, 5.62,
)

EQUICORRELATION = 0.68

# Assets 1, 7, 8, 9 (1-based) carry the four smallest variances.
LOW_VARIANCE_ASSETS = (0, 6, 7, 8)

SYNTHETIC_MONTHS = 120
SYNTHETIC_SEED = 20030112


def industry_moments(
    correlation: float = EQUICORRELATION,
) -> MarketMoments:
    """Ten-asset moments: published means and deviations, synthetic
    equicorrelated covariance."""
    mu = np.asarray(INDUSTRY_MEAN_PERCENT) / 100.0
    sd = np.asarray(INDUSTRY_STD_PERCENT) / 100.0
    sigma = correlation * np.outer(sd, sd)
    np.fill_diagonal(sigma, sd * sd)
    return MarketMoments(mu, sigma)


def four_asset_moments(
    correlation: float = EQUICORRELATION,
) -> MarketMoments:
    """Restriction to the four lowest-variance assets."""
    full = industry_moments(correlation)
    idx = list(LOW_VARIANCE_ASSETS)
    return MarketMoments(full.mu[idx], full.sigma[np.ix_(idx, idx)])


def make_synthetic_returns(
    months: int = SYNTHETIC_MONTHS, seed: int = SYNTHETIC_SEED
) -> np.ndarray:
    """Decimal return sample whose sample mean and unbiased covariance
    match `industry_moments` exactly (whitened draw, then recolored)."""
    m = industry_moments()
    n = m.n_assets
    if months < n + 2:
        raise ValueError(f"need at least {n + 2} months, got {months}")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((months, n))
    x -= x.mean(axis=0)
    sample = np.cov(x, rowvar=False)
    white = x @ np.linalg.inv(np.linalg.cholesky(sample)).T
    return white @ np.linalg.cholesky(m.sigma).T + m.mu


def synthetic_returns_path() -> Path:
    """Packaged CSV of `make_synthetic_returns`, percent units, one row
    per month from 200301 to 201212."""
    return Path(
        resources.files("rgopkit").joinpath("data/industry10_synthetic.csv")
    )
