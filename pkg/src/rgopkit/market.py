"""Market moment data, validation, and moment projection.

Per-period asset returns are described by a mean vector mu, a covariance
matrix sigma (both in decimal units) and a lag correlation profile rho that
induces a T x T autocorrelation matrix P.  A portfolio w projects these onto
the scalar moments (w' mu, w' sigma w) of the per-period portfolio return;
the correlation profile carries over unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .circulant import CirculantVector, eigenvalues_symmetric, materialize
from .errors import (
    DegenerateScale,
    DimensionMismatch,
    HorizonTooShort,
    NonFiniteData,
    NotPositiveDefinite,
    NotSymmetric,
    RhoZeroNotOne,
    SymmetryViolation,
    TooFewObservations,
)

# Positive definiteness requires min eigenvalue > PSD_RTOL * trace / dim.
PSD_RTOL = 1e-10

_SYM_TOL = 1e-12


def _readonly(a, dtype=float):
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


class CorrelationKind(str, Enum):
    """Structure of the induced autocorrelation matrix P."""

    CIRCULANT = "circulant"
    TOEPLITZ = "toeplitz"


@dataclass(frozen=True)
class AutocorrelationSpec:
    """Lag correlation profile rho_0..rho_{T-1} and the structure it induces.

    ``CIRCULANT`` wraps the profile cyclically (P[s, t] = rho_{(s-t) mod T},
    requiring rho_t == rho_{T-t}); ``TOEPLITZ`` depends on |s - t| only and
    carries no wrap-around constraint.
    """

    rho: np.ndarray
    kind: CorrelationKind = CorrelationKind.CIRCULANT

    def __post_init__(self):
        rho = np.atleast_1d(np.asarray(self.rho, dtype=float))
        if rho.ndim != 1 or rho.size < 1:
            raise DimensionMismatch("rho must be a 1-D vector of length >= 1")
        if not np.isfinite(rho).all():
            raise NonFiniteData("rho contains non-finite entries")
        object.__setattr__(self, "rho", _readonly(rho))
        object.__setattr__(self, "kind", CorrelationKind(self.kind))

    @property
    def horizon(self) -> int:
        """Number of periods T."""
        return self.rho.size

    def matrix(self) -> np.ndarray:
        """Dense T x T autocorrelation matrix P."""
        T = self.horizon
        if self.kind is CorrelationKind.CIRCULANT:
            return materialize(CirculantVector(self.rho))
        lag = np.abs(np.arange(T)[:, None] - np.arange(T)[None, :])
        return self.rho[lag]

    @classmethod
    def constant(cls, horizon: int, value: float, kind=CorrelationKind.CIRCULANT):
        """Profile with rho_t = value at every nonzero lag."""
        if horizon < 1:
            raise HorizonTooShort(f"horizon must be >= 1, got {horizon}")
        rho = np.full(horizon, float(value))
        rho[0] = 1.0
        return cls(rho=rho, kind=kind)

    @classmethod
    def uncorrelated(cls, horizon: int, kind=CorrelationKind.CIRCULANT):
        return cls.constant(horizon, 0.0, kind=kind)


def validate(spec: AutocorrelationSpec) -> AutocorrelationSpec:
    """Check rho_0 = 1, circulant symmetry, and positive definiteness of P.

    Returns the spec unchanged if every check passes.

    Raises
    ------
    RhoZeroNotOne
        If rho_0 differs from 1.
    SymmetryViolation
        Circulant kind only: rho_t != rho_{T-t} for some t.
    NotPositiveDefinite
        If the induced matrix P has an eigenvalue at or below the tolerance
        floor; the minimum eigenvalue is attached to the error.
    """
    rho = spec.rho
    T = spec.horizon
    if rho[0] != 1.0:
        raise RhoZeroNotOne(f"rho_0 must equal 1 exactly, got {rho[0]!r}")
    if spec.kind is CorrelationKind.CIRCULANT and T > 1:
        gap = np.abs(rho[1:] - rho[1:][::-1]).max()
        if gap > _SYM_TOL:
            raise SymmetryViolation(
                f"circulant profile requires rho_t == rho_(T-t); max gap {gap:.3e}"
            )
    if spec.kind is CorrelationKind.CIRCULANT:
        eigs = eigenvalues_symmetric(CirculantVector(rho))
    else:
        eigs = np.linalg.eigvalsh(spec.matrix())
    min_eig = float(eigs.min())
    # trace(P)/T = rho_0 = 1, so the scale-free floor is just PSD_RTOL
    if min_eig <= PSD_RTOL:
        raise NotPositiveDefinite(
            f"autocorrelation matrix is not positive definite "
            f"(min eigenvalue {min_eig:.6e})",
            min_eigenvalue=min_eig,
        )
    return spec


@dataclass(frozen=True)
class MarketMoments:
    """Per-period mean vector and covariance matrix, decimal units."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim == 0:
            sigma = sigma.reshape(1, 1)
        if mu.ndim != 1:
            raise DimensionMismatch("mu must be a 1-D vector")
        if sigma.shape != (mu.size, mu.size):
            raise DimensionMismatch(
                f"sigma shape {sigma.shape} does not match mu length {mu.size}"
            )
        if not (np.isfinite(mu).all() and np.isfinite(sigma).all()):
            raise NonFiniteData("moments contain non-finite entries")
        if np.abs(sigma - sigma.T).max() > _SYM_TOL:
            raise NotSymmetric("sigma is not symmetric within 1e-12")
        eigs = np.linalg.eigvalsh(sigma)
        floor = PSD_RTOL * np.trace(sigma) / sigma.shape[0]
        if eigs[0] <= floor:
            raise NotPositiveDefinite(
                f"sigma is not positive definite (min eigenvalue {eigs[0]:.6e})",
                min_eigenvalue=float(eigs[0]),
            )
        object.__setattr__(self, "mu", _readonly(mu))
        object.__setattr__(self, "sigma", _readonly(sigma))

    @property
    def n_assets(self) -> int:
        return self.mu.size


@dataclass(frozen=True)
class Portfolio:
    """Weight vector of a fixed-mix strategy."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if w.ndim != 1:
            raise DimensionMismatch("weights must be a 1-D vector")
        if not np.isfinite(w).all():
            raise NonFiniteData("weights contain non-finite entries")
        object.__setattr__(self, "weights", _readonly(w))

    @property
    def n_assets(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class ProjectedMoments:
    """Scalar moments of the per-period portfolio return."""

    mean_return: float
    variance: float
    spec: AutocorrelationSpec = field(
        default_factory=lambda: AutocorrelationSpec(np.ones(1))
    )

    def __post_init__(self):
        object.__setattr__(self, "mean_return", float(self.mean_return))
        object.__setattr__(self, "variance", float(self.variance))
        if not self.variance > 0.0:
            raise ValueError(f"variance must be positive, got {self.variance}")


def aggregate_rho(spec: AutocorrelationSpec) -> float:
    """Aggregate correlation rho_bar, the only channel through which the
    profile enters the closed-form growth rate.

    Circulant kind: the plain mean of rho_1..rho_{T-1}.  Toeplitz kind: the
    lag-weighted mean (2 / (T (T-1))) * sum_t (T - t) rho_t, which coincides
    with the circulant value whenever the profile is wrap-around symmetric.
    """
    T = spec.horizon
    if T < 2:
        raise HorizonTooShort(f"aggregate correlation needs T >= 2, got T={T}")
    tail = spec.rho[1:]
    if spec.kind is CorrelationKind.CIRCULANT:
        return float(tail.mean())
    t = np.arange(1, T)
    return float(2.0 / (T * (T - 1)) * ((T - t) * tail).sum())


def modified_covariance(sigma: np.ndarray, rho_bar: float, T: int) -> np.ndarray:
    """Covariance inflated by serial correlation: (1 + (T-1) rho_bar) * sigma."""
    scale = 1.0 + (T - 1) * rho_bar
    if scale <= 0.0:
        raise DegenerateScale(
            f"1 + (T-1)*rho_bar must be positive, got {scale:.6e} "
            f"(T={T}, rho_bar={rho_bar})"
        )
    return scale * np.asarray(sigma, dtype=float)


def project_moments(
    m: MarketMoments, w: Portfolio, spec: AutocorrelationSpec
) -> ProjectedMoments:
    """Scalar moments (w' mu, w' sigma w) of the portfolio return."""
    if w.n_assets != m.n_assets:
        raise DimensionMismatch(
            f"portfolio has {w.n_assets} weights, market has {m.n_assets} assets"
        )
    ww = w.weights
    return ProjectedMoments(
        mean_return=float(ww @ m.mu),
        variance=float(ww @ m.sigma @ ww),
        spec=spec,
    )


def build_moment_matrix(p: ProjectedMoments) -> np.ndarray:
    """Second-order moment matrix of (eta_1..eta_T, 1), size (T+1) x (T+1).

    Upper-left block is variance * P + mean^2 * ones; border is the mean;
    corner is 1.
    """
    T = p.spec.horizon
    mean, var = p.mean_return, p.variance
    omega = np.empty((T + 1, T + 1))
    omega[:T, :T] = var * p.spec.matrix() + mean * mean
    omega[:T, T] = mean
    omega[T, :T] = mean
    omega[T, T] = 1.0
    return omega


def estimate_moments(returns: np.ndarray) -> MarketMoments:
    """Sample mean and unbiased sample covariance of a K x N return matrix.

    Raises
    ------
    TooFewObservations
        If K < N + 1 (the covariance would be singular or undefined).
    NonFiniteData
        If any entry is NaN or infinite.
    """
    R = np.asarray(returns, dtype=float)
    if R.ndim != 2:
        raise DimensionMismatch("returns must be a K x N matrix")
    K, N = R.shape
    if K < N + 1:
        raise TooFewObservations(
            f"need at least N+1={N + 1} observations to estimate an N={N} "
            f"covariance, got {K}"
        )
    if not np.isfinite(R).all():
        raise NonFiniteData("returns contain non-finite entries")
    mu = R.mean(axis=0)
    sigma = np.atleast_2d(np.cov(R, rowvar=False, ddof=1))
    return MarketMoments(mu=mu, sigma=sigma)


def random_circulant_spec(
    rng: np.random.Generator,
    horizon: int,
    eigenvalue_range: tuple = (0.1, 2.0),
) -> AutocorrelationSpec:
    """Draw a valid wrap-around lag profile by sampling a positive
    symmetric spectrum and mapping it back to lag space."""
    lo, hi = eigenvalue_range
    lam = rng.uniform(lo, hi, size=horizon)
    if horizon > 1:
        lam[1:] = (lam[1:] + lam[1:][::-1]) / 2.0
    t = np.arange(horizon)
    rho = np.array(
        [
            (lam * np.cos(2.0 * np.pi * j * t / horizon)).sum() / horizon
            for j in range(horizon)
        ]
    )
    return AutocorrelationSpec(rho / rho[0])
