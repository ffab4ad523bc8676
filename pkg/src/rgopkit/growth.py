"""Closed-form worst-case growth rate and its risk decomposition.

The worst-case growth rate of a fixed-mix portfolio over T periods, at
violation probability epsilon, admits a closed form whenever the feasibility
margin below is positive:

    G = 1/2 * (1 - (1 - m + sqrt((1-eps) s / (eps T)) * sd)^2
                 - ((T-1)(1 - rho_bar) / (eps T)) * v)

with m = w'mu, v = w'Sigma w, sd = sqrt(v), and s = 1 + (T-1) rho_bar.  The
lag profile enters only through the aggregate correlation rho_bar.

The negated rate splits into a persistent risk v / (2 eps), independent of
serial correlation, and a compounding risk that absorbs rho_bar through the
inflated covariance s * Sigma.  Both code paths are evaluated on every call
and reconciled; disagreement indicates an internal bug, not bad input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    BothZero,
    DegenerateScale,
    DimensionMismatch,
    HorizonTooShort,
    InternalConsistencyError,
    PreconditionViolated,
)
from .market import ProjectedMoments, aggregate_rho

# Absolute reconciliation budget between the direct formula and the
# persistent/compounding decomposition (algebraically identical).
_RECONCILE_TOL = 1e-8


@dataclass(frozen=True)
class GrowthQuery:
    """Violation probability and horizon of a growth-rate evaluation."""

    epsilon: float
    horizon: int

    def __post_init__(self):
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "horizon", int(self.horizon))
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.horizon < 1:
            raise HorizonTooShort(f"horizon must be >= 1, got {self.horizon}")


@dataclass(frozen=True)
class GrowthResult:
    """Worst-case growth rate with its feasibility margin and risk split.

    ``persistent_risk + compounding_risk == -growth_rate`` up to rounding;
    the sum is verified against the direct formula on construction by the
    evaluation routines.
    """

    growth_rate: float
    feasibility_margin: float
    persistent_risk: float
    compounding_risk: float
    rho_bar_used: float


def _scale_or_raise(rho_bar: float, T: int) -> float:
    scale = 1.0 + (T - 1) * rho_bar
    if scale <= 0.0:
        raise DegenerateScale(
            f"1 + (T-1)*rho_bar must be positive, got {scale:.6e} "
            f"(T={T}, rho_bar={rho_bar})"
        )
    if T >= 2 and rho_bar > 1.0:
        raise DegenerateScale(
            f"aggregate correlation must not exceed 1, got {rho_bar}"
        )
    return scale


def _margin(mean: float, sd: float, scale: float, eps: float, T: int) -> float:
    return (1.0 - mean) - math.sqrt(scale * eps / ((1.0 - eps) * T)) * sd


def feasibility_margin(
    p: ProjectedMoments, rho_bar: float, q: GrowthQuery
) -> float:
    """Slack of the closed form's hypothesis; the formula applies iff > 0.

    Returns (1 - mean) - sqrt(s * eps / ((1-eps) T)) * sd where
    s = 1 + (T-1) rho_bar.
    """
    scale = _scale_or_raise(rho_bar, q.horizon)
    return _margin(
        p.mean_return, math.sqrt(p.variance), scale, q.epsilon, q.horizon
    )


def _growth_core(
    mean: float, variance: float, rho_bar: float, eps: float, T: int
) -> GrowthResult:
    scale = _scale_or_raise(rho_bar, T)
    sd = math.sqrt(variance)
    margin = _margin(mean, sd, scale, eps, T)
    if margin <= 0.0:
        raise PreconditionViolated(
            f"closed form does not apply: feasibility margin "
            f"{margin:.6e} is not positive",
            margin=margin,
        )
    shortfall = 1.0 - mean + math.sqrt((1.0 - eps) * scale / (eps * T)) * sd
    growth = 0.5 * (
        1.0
        - shortfall * shortfall
        - ((T - 1) * (1.0 - rho_bar) / (eps * T)) * variance
    )

    # independent decomposition path via the inflated covariance
    persistent = variance / (2.0 * eps)
    var_hat = scale * variance
    hat_shortfall = 1.0 - mean + math.sqrt((1.0 - eps) / (eps * T) * var_hat)
    compounding = -0.5 * (
        1.0 - hat_shortfall * hat_shortfall + var_hat / (eps * T)
    )
    drift = abs(persistent + compounding + growth)
    if drift > _RECONCILE_TOL:
        raise InternalConsistencyError(
            f"risk decomposition disagrees with the direct formula by "
            f"{drift:.3e}"
        )
    return GrowthResult(
        growth_rate=growth,
        feasibility_margin=margin,
        persistent_risk=persistent,
        compounding_risk=compounding,
        rho_bar_used=rho_bar,
    )


def worst_case_growth_rate(
    p: ProjectedMoments, rho_bar: float, q: GrowthQuery
) -> GrowthResult:
    """Closed-form worst-case growth rate at aggregate correlation rho_bar.

    Parameters
    ----------
    p : ProjectedMoments
        Scalar portfolio-return moments (mean, variance).
    rho_bar : float
        Aggregate lag correlation; pass 0 for a serially uncorrelated market.
    q : GrowthQuery
        Violation probability epsilon and horizon T.

    Returns
    -------
    GrowthResult
        Growth rate, feasibility margin, and the persistent/compounding
        risk split.

    Raises
    ------
    PreconditionViolated
        If the feasibility margin is not positive (the closed form does not
        extrapolate outside its hypothesis; the margin is attached).
    DegenerateScale
        If 1 + (T-1) rho_bar <= 0 or rho_bar > 1.
    """
    return _growth_core(
        p.mean_return, p.variance, rho_bar, q.epsilon, q.horizon
    )


def approx_growth_rate_general(
    p: ProjectedMoments, q: GrowthQuery
) -> GrowthResult:
    """Growth-rate lower bound for a general (non-wrapping) lag profile.

    Aggregates the profile with lag weights (T - t), then evaluates the
    closed form.  Never exceeds the exact conic value for a valid profile.
    """
    if p.spec.horizon != q.horizon:
        raise DimensionMismatch(
            f"profile has {p.spec.horizon} lags but the query horizon "
            f"is {q.horizon}"
        )
    rho_bar = aggregate_rho(p.spec) if q.horizon >= 2 else 0.0
    return _growth_core(
        p.mean_return, p.variance, rho_bar, q.epsilon, q.horizon
    )


def relative_gap(a: float, b: float) -> float:
    """Symmetric relative difference 2 (a - b) / (|a| + |b|)."""
    denom = abs(a) + abs(b)
    if denom == 0.0:
        raise BothZero("relative gap of (0, 0) is undefined")
    return 2.0 * (a - b) / denom
