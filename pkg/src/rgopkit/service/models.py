"""Request and response schemas for the compute service."""

from __future__ import annotations

from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..market import (
    AutocorrelationSpec,
    CorrelationKind,
    MarketMoments,
    Portfolio,
)
from ..optimizer import PortfolioConstraintSet

SCHEMA_VERSION = 1


class ProfilePayload(BaseModel):
    """Lag profile: either the full rho vector (rho_0 = 1 first) or a
    constant value applied to every nonzero lag."""

    rho: Optional[List[float]] = None
    constant_value: Optional[float] = None
    horizon: Optional[int] = None
    kind: Literal["circulant", "toeplitz"] = "circulant"

    @model_validator(mode="after")
    def _one_form(self):
        explicit = self.rho is not None
        constant = self.constant_value is not None
        if explicit == constant:
            raise ValueError(
                "give either rho or constant_value, not both or neither"
            )
        if constant and self.horizon is None:
            raise ValueError("constant_value requires horizon")
        if explicit and self.horizon is not None and len(self.rho) != self.horizon:
            raise ValueError(
                f"rho has {len(self.rho)} entries but horizon is "
                f"{self.horizon}"
            )
        return self

    def to_spec(self) -> AutocorrelationSpec:
        kind = CorrelationKind(self.kind)
        if self.rho is not None:
            return AutocorrelationSpec(np.asarray(self.rho, float), kind)
        return AutocorrelationSpec.constant(
            self.horizon, self.constant_value, kind
        )


class MomentsPayload(BaseModel):
    mu: List[float]
    sigma: List[List[float]]

    def to_moments(self) -> MarketMoments:
        return MarketMoments(
            np.asarray(self.mu, float), np.asarray(self.sigma, float)
        )

    @classmethod
    def from_moments(cls, m: MarketMoments) -> "MomentsPayload":
        return cls(mu=m.mu.tolist(), sigma=m.sigma.tolist())


class ConstraintSetPayload(BaseModel):
    lower_bounds: Optional[List[float]] = None
    upper_bounds: Optional[List[float]] = None
    inequalities: List[Tuple[List[float], float]] = Field(default_factory=list)

    def to_constraints(self, n_assets: int) -> PortfolioConstraintSet:
        lo = (
            np.zeros(n_assets)
            if self.lower_bounds is None
            else np.asarray(self.lower_bounds, float)
        )
        hi = (
            np.ones(n_assets)
            if self.upper_bounds is None
            else np.asarray(self.upper_bounds, float)
        )
        rows = tuple(
            (np.asarray(c, float), float(b)) for c, b in self.inequalities
        )
        return PortfolioConstraintSet(lo, hi, rows)


class GrowthRequest(BaseModel):
    """Evaluate the worst-case growth rate, either from projected scalar
    moments or from market moments plus a portfolio."""

    epsilon: float
    profile: ProfilePayload
    mean: Optional[float] = None
    variance: Optional[float] = None
    moments: Optional[MomentsPayload] = None
    weights: Optional[List[float]] = None

    @model_validator(mode="after")
    def _one_source(self):
        projected = self.mean is not None and self.variance is not None
        market = self.moments is not None and self.weights is not None
        if projected == market:
            raise ValueError(
                "give either (mean, variance) or (moments, weights)"
            )
        return self

    def to_portfolio(self) -> Optional[Portfolio]:
        if self.weights is None:
            return None
        return Portfolio(np.asarray(self.weights, float))


class VerifyRequest(BaseModel):
    """Cross-check the closed form against the conic oracles, either on one
    explicit instance or on a seeded batch of random ones."""

    epsilon: Optional[float] = None
    profile: Optional[ProfilePayload] = None
    mean: Optional[float] = None
    variance: Optional[float] = None
    instances: int = 0
    seed: Optional[int] = None
    horizon_min: int = 2
    horizon_max: int = 10
    mean_range: Tuple[float, float] = (0.0, 0.3)
    sd_range: Tuple[float, float] = (0.01, 0.3)
    epsilon_range: Tuple[float, float] = (0.05, 0.5)
    tolerance: float = 1e-5

    @model_validator(mode="after")
    def _one_mode(self):
        explicit = (
            self.profile is not None
            and self.mean is not None
            and self.variance is not None
            and self.epsilon is not None
        )
        if explicit == (self.instances > 0):
            raise ValueError(
                "give either one explicit instance or instances > 0"
            )
        if self.instances > 0 and self.seed is None:
            raise ValueError("a random batch requires a seed")
        return self


class OptimizeRequest(BaseModel):
    moments: MomentsPayload
    epsilon: float
    horizon: int
    rho_bar: float = 0.0
    constraints: Optional[ConstraintSetPayload] = None


class FrontierRequest(BaseModel):
    moments: MomentsPayload
    epsilon: float
    horizon: int
    rho_bars: List[float] = Field(default_factory=lambda: [0.0])
    points: int = 30
    constraints: Optional[ConstraintSetPayload] = None
    include_weights: bool = False


class SimulateRequest(BaseModel):
    """Compare the correlation-aware and correlation-ignorant optimal
    portfolios on simulated Gaussian paths, one row per horizon.

    With rho_bar omitted, each horizon uses the constant profile
    rho_t = -1/T.  With moments omitted, the packaged four-asset
    calibration is used.
    """

    moments: Optional[MomentsPayload] = None
    horizons: List[int] = Field(default_factory=lambda: [12, 24, 48])
    epsilon: float = 0.10
    scenarios: int = 10_000
    seed: int = 0
    rho_bar: Optional[float] = None
    include_sharpe_samples: bool = False


class ApproxErrorRequest(BaseModel):
    """Relative error of the aggregate-correlation shortcut against the
    dense program on random non-wrapping profiles, per horizon.

    Exact values are only computed where the dense solve is allowed
    (horizon <= 16); larger horizons report the shortcut alone.
    """

    horizons: List[int] = Field(
        default_factory=lambda: list(range(4, 73, 4))
    )
    repetitions: int = 20
    epsilon: float = 0.15
    mean: float = 0.15
    sd: float = 0.20
    rho_low: float = 0.0
    rho_high: float = 0.2
    seed: int = 0


class EstimateMomentsRequest(BaseModel):
    returns: List[List[float]]
    labels: Optional[List[str]] = None


class ResultRecord(BaseModel):
    schema_version: int = SCHEMA_VERSION
    command: str
    inputs: dict
    outputs: dict
    software_version: str
    timestamp: str
    seed: Optional[int] = None
