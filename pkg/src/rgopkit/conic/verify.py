"""Certificate-checked front ends for the growth-rate conic oracles.

Residual checking here is deliberately independent of the solver: every
constraint is re-evaluated from the raw problem data at the returned point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import HorizonTooLargeForSDP, NumericalFailure
from ..growth import GrowthQuery
from ..market import (
    AutocorrelationSpec,
    MarketMoments,
    Portfolio,
    ProjectedMoments,
    build_moment_matrix,
    project_moments,
    validate,
)
from .builders import build_sdp, build_socp
from .problem import ConicProblem, ConicSolution, Relation, SolveStatus
from .solver import DEFAULT_TOL, solve_conic

MAX_SDP_HORIZON = 16


@dataclass(frozen=True)
class ResidualReport:
    """Signed constraint violations at a candidate point.

    Positive entries mean the constraint is violated by that amount;
    nonpositive entries are satisfied with slack.  Second-order entries are
    measured after mapping to the plain cone so all numbers share one scale.
    """

    linear: np.ndarray
    second_order: np.ndarray
    psd_min_eigenvalues: np.ndarray
    objective_value: float

    @property
    def worst(self) -> float:
        parts = [self.linear, self.second_order, -self.psd_min_eigenvalues]
        stacked = np.concatenate([np.atleast_1d(p) for p in parts])
        return float(stacked.max()) if stacked.size else -math.inf

    def feasible(self, tol: float = DEFAULT_TOL) -> bool:
        return self.worst <= tol


def evaluate_point(prob: ConicProblem, x: np.ndarray) -> ResidualReport:
    """Recompute every constraint residual of `prob` at `x` from scratch."""
    x = np.asarray(x, dtype=float)
    lin = np.zeros(len(prob.linear_constraints))
    for i, c in enumerate(prob.linear_constraints):
        value = float(c.coefficients @ x)
        if c.relation is Relation.LE:
            lin[i] = value - c.bound
        elif c.relation is Relation.GE:
            lin[i] = c.bound - value
        else:
            lin[i] = abs(value - c.bound)

    soc = np.zeros(len(prob.soc_constraints))
    inv_r2 = 1.0 / math.sqrt(2.0)
    for i, c in enumerate(prob.soc_constraints):
        y = c.matrix @ x + c.offset
        if c.rotated:
            head = np.array([(y[0] + y[1]) * inv_r2, (y[0] - y[1]) * inv_r2])
            y = np.concatenate([head[:1], head[1:], y[2:]])
        soc[i] = float(np.linalg.norm(y[1:]) - y[0])

    psd = np.zeros(len(prob.psd_constraints))
    for i, c in enumerate(prob.psd_constraints):
        mat = c.evaluate(x)
        psd[i] = float(np.linalg.eigvalsh(mat).min())

    return ResidualReport(
        linear=lin,
        second_order=soc,
        psd_min_eigenvalues=psd,
        objective_value=float(prob.objective @ x),
    )


def check_certificate(
    sol: ConicSolution, prob: ConicProblem, tol: float = DEFAULT_TOL
) -> ResidualReport:
    """Independent residual report for a solution claimed optimal.

    Reports only; callers decide what to do with violations above `tol`.
    """
    report = evaluate_point(prob, sol.variables)
    return report


def _solve_checked(prob: ConicProblem, tol: float) -> ConicSolution:
    sol = solve_conic(prob, tol=tol)
    if sol.status is not SolveStatus.OPTIMAL:
        raise NumericalFailure(
            f"conic solve ended with status {sol.status.value} "
            f"(residual {sol.max_residual:.3e})"
        )
    report = check_certificate(sol, prob, tol)
    # Loose cap: interior-point residuals are relative, the report absolute.
    if not report.feasible(tol * 100.0):
        raise NumericalFailure(
            f"certificate check failed: worst violation {report.worst:.3e}"
        )
    return sol


def exact_growth_rate(
    m: MarketMoments,
    w: Portfolio,
    spec: AutocorrelationSpec,
    q: GrowthQuery,
    tol: float = DEFAULT_TOL,
    max_sdp_horizon: int = MAX_SDP_HORIZON,
) -> float:
    """Worst-case growth rate via the dense moment-matrix program.

    Valid for any positive definite lag profile, cyclic or not; this is the
    exact (non-approximate) value, at the cost of a PSD block of side T+1.
    """
    if q.horizon > max_sdp_horizon:
        raise HorizonTooLargeForSDP(
            f"horizon {q.horizon} exceeds the dense solve cap "
            f"{max_sdp_horizon}"
        )
    validate(spec)
    p = project_moments(m, w, spec)
    prob = build_sdp(build_moment_matrix(p), q)
    return _solve_checked(prob, tol).objective_value


def sdp_growth_rate(
    p: ProjectedMoments,
    q: GrowthQuery,
    tol: float = DEFAULT_TOL,
    max_sdp_horizon: int = MAX_SDP_HORIZON,
) -> float:
    """Moment-matrix route from already-projected scalar moments."""
    if q.horizon > max_sdp_horizon:
        raise HorizonTooLargeForSDP(
            f"horizon {q.horizon} exceeds the dense solve cap "
            f"{max_sdp_horizon}"
        )
    prob = build_sdp(build_moment_matrix(p), q)
    return _solve_checked(prob, tol).objective_value


def socp_growth_rate(
    p: ProjectedMoments, q: GrowthQuery, tol: float = DEFAULT_TOL
) -> float:
    """Cone-reduction route; requires a cyclically wrapping profile."""
    prob = build_socp(p, q)
    return _solve_checked(prob, tol).objective_value
