"""Portfolio selection: the robust growth-optimal portfolio and
mean-variance efficient frontiers over a polyhedral weight set."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .conic import (
    ConicProblem,
    LinearConstraint,
    Relation,
    SecondOrderConeConstraint,
    SolveStatus,
    solve_conic,
)
from .errors import (
    ConvergenceFailure,
    DegenerateScale,
    InfeasibleConstraints,
    NumericalFailure,
    PreconditionViolated,
)
from .growth import GrowthQuery, feasibility_margin, worst_case_growth_rate
from .market import MarketMoments, Portfolio, ProjectedMoments

_FEAS_TOL = 1e-9


def _readonly(a) -> np.ndarray:
    out = np.asarray(a, dtype=float).copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class PortfolioConstraintSet:
    """Weight polytope: box bounds, full investment, and optional extra
    one-sided rows coefficients @ w <= bound."""

    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    inequalities: Tuple[Tuple[np.ndarray, float], ...] = ()

    def __post_init__(self):
        lo = _readonly(self.lower_bounds)
        hi = _readonly(self.upper_bounds)
        object.__setattr__(self, "lower_bounds", lo)
        object.__setattr__(self, "upper_bounds", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise InfeasibleConstraints(
                f"bound shapes differ: {lo.shape} vs {hi.shape}"
            )
        if not np.isfinite(lo).all():
            raise InfeasibleConstraints(
                "lower bounds must be finite to keep the region bounded"
            )
        if np.any(lo > hi):
            raise InfeasibleConstraints("some lower bound exceeds its upper")
        if lo.sum() > 1.0 + _FEAS_TOL or np.minimum(hi, 1.0).sum() < 1.0 - _FEAS_TOL:
            raise InfeasibleConstraints(
                "box bounds are incompatible with full investment"
            )
        rows = []
        for coeff, bound in self.inequalities:
            c = _readonly(coeff)
            if c.shape != lo.shape:
                raise InfeasibleConstraints(
                    f"inequality row has {c.size} coefficients for "
                    f"{lo.size} assets"
                )
            rows.append((c, float(bound)))
        object.__setattr__(self, "inequalities", tuple(rows))

    @property
    def n_assets(self) -> int:
        return self.lower_bounds.size

    @classmethod
    def simplex(cls, n_assets: int) -> "PortfolioConstraintSet":
        """Long-only, fully invested weights."""
        return cls(np.zeros(n_assets), np.ones(n_assets))

    @property
    def is_plain_simplex(self) -> bool:
        return (
            not self.inequalities
            and np.all(self.lower_bounds == 0.0)
            and np.all(self.upper_bounds >= 1.0)
        )

    def contains(self, w: np.ndarray, tol: float = 1e-8) -> bool:
        w = np.asarray(w, dtype=float)
        if abs(w.sum() - 1.0) > tol:
            return False
        if np.any(w < self.lower_bounds - tol) or np.any(
            w > self.upper_bounds + tol
        ):
            return False
        return all(c @ w <= b + tol for c, b in self.inequalities)


@dataclass(frozen=True)
class FrontierPoint:
    portfolio: Portfolio
    expected_return: float
    variance: float
    growth_rate: Optional[float] = None


@dataclass(frozen=True)
class RgopResult:
    """Robust growth-optimal portfolio plus its growth value and whether the
    feasibility precondition was certified over the whole weight set (always
    point-checked; global certification needs the plain simplex)."""

    portfolio: Portfolio
    growth_rate: float
    precondition_certified: bool


def _box_rows(W: PortfolioConstraintSet, n_total: int) -> list:
    """Full-investment equality, box bounds, and extra rows, padded with
    zeros for any trailing auxiliary variables."""
    n = W.n_assets
    rows = []
    full = np.zeros(n_total)
    full[:n] = 1.0
    rows.append(LinearConstraint(full, Relation.EQ, 1.0))
    for i in range(n):
        if W.lower_bounds[i] > -np.inf:
            r = np.zeros(n_total)
            r[i] = 1.0
            rows.append(LinearConstraint(r, Relation.GE, W.lower_bounds[i]))
        if W.upper_bounds[i] < np.inf:
            r = np.zeros(n_total)
            r[i] = 1.0
            rows.append(LinearConstraint(r, Relation.LE, W.upper_bounds[i]))
    for coeff, bound in W.inequalities:
        r = np.zeros(n_total)
        r[:n] = coeff
        rows.append(LinearConstraint(r, Relation.LE, bound))
    return rows


def _variance_cone(
    sigma_chol_t: np.ndarray, n_total: int, epigraph_index: int
) -> SecondOrderConeConstraint:
    """v >= ||Sigma^{1/2} w|| with v at `epigraph_index`."""
    n = sigma_chol_t.shape[1]
    M = np.zeros((n + 1, n_total))
    M[0, epigraph_index] = 1.0
    M[1:, :n] = sigma_chol_t
    return SecondOrderConeConstraint(M, np.zeros(n + 1))


def _solve(prob: ConicProblem, what: str, tol: float = 1e-7):
    sol = solve_conic(prob, tol=tol)
    if sol.status is SolveStatus.INFEASIBLE:
        raise InfeasibleConstraints(f"{what}: the weight set is empty")
    if sol.status is not SolveStatus.OPTIMAL:
        raise NumericalFailure(
            f"{what}: solver status {sol.status.value} "
            f"(residual {sol.max_residual:.3e})"
        )
    return sol


def _risk_coefficients(rho_bar: float, q: GrowthQuery) -> Tuple[float, float]:
    """Weights of the mean shift and the variance penalty in the closed-form
    growth rate; both require 1 + (T-1) rho_bar > 0 and rho_bar <= 1."""
    T, eps = q.horizon, q.epsilon
    scale = 1.0 + (T - 1) * rho_bar
    if scale <= 0.0:
        raise DegenerateScale(
            f"1 + (T-1)*rho_bar must be positive, got {scale:.6e}"
        )
    if T >= 2 and rho_bar > 1.0:
        raise DegenerateScale(f"rho_bar must not exceed 1, got {rho_bar}")
    a = math.sqrt((1.0 - eps) * scale / (eps * T))
    b_sq = (T - 1) * (1.0 - rho_bar) / (eps * T)
    return a, math.sqrt(max(b_sq, 0.0))


def _project_to_simplex(u: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    srt = np.sort(u)[::-1]
    css = np.cumsum(srt) - 1.0
    idx = np.arange(1, u.size + 1)
    cond = srt - css / idx > 0
    k = idx[cond][-1]
    tau = css[cond][-1] / k
    return np.maximum(u - tau, 0.0)


def _simplex_descent(
    m: MarketMoments, a: float, b: float, max_iter: int = 20000
) -> np.ndarray:
    """Projected-gradient minimization of the norm-squared growth objective
    over the plain simplex; convex wherever the mean margin is positive."""
    mu, sigma = m.mu, m.sigma
    n = mu.size

    def value_grad(w):
        sw = sigma @ w
        nrm = math.sqrt(float(w @ sw))
        h = 1.0 - float(mu @ w) + a * nrm
        val = 0.5 * (h * h + b * b * float(w @ sw))
        grad = h * (-mu + a * sw / nrm) + b * b * sw
        return val, grad

    w = np.full(n, 1.0 / n)
    val, grad = value_grad(w)
    step = 1.0
    for _ in range(max_iter):
        while True:
            cand = _project_to_simplex(w - step * grad)
            cval, cgrad = value_grad(cand)
            move = cand - w
            if cval <= val + grad @ move + 0.5 / step * float(move @ move):
                break
            step *= 0.5
            if step < 1e-18:
                raise ConvergenceFailure(
                    "line search underflow in simplex descent"
                )
        if np.abs(move).max() < 1e-12 and val - cval < 1e-16 * max(1.0, val):
            return cand
        w, val, grad = cand, cval, cgrad
        step = min(step * 2.0, 1.0)
    raise ConvergenceFailure(
        f"simplex descent did not converge in {max_iter} iterations"
    )


def _certify_precondition(
    m: MarketMoments, W: PortfolioConstraintSet, rho_bar: float, q: GrowthQuery
) -> Optional[bool]:
    """Check the mean-margin condition over all of W when possible.

    The violation is convex in w, so over the plain simplex its maximum sits
    at a coordinate vertex and can be checked exactly.  Returns True/False
    for a definite answer, None when no global certificate is available.
    """
    if not W.is_plain_simplex:
        return None
    diag_sd = np.sqrt(np.diag(m.sigma))
    for i in range(W.n_assets):
        p = ProjectedMoments(float(m.mu[i]), float(diag_sd[i] ** 2))
        if feasibility_margin(p, rho_bar, q) <= 0.0:
            return False
    return True


def _margin_at(
    m: MarketMoments, w: np.ndarray, rho_bar: float, q: GrowthQuery
) -> float:
    p = ProjectedMoments(float(w @ m.mu), float(w @ m.sigma @ w))
    return feasibility_margin(p, rho_bar, q)


def rgop(
    m: MarketMoments,
    rho_bar: float,
    q: GrowthQuery,
    W: Optional[PortfolioConstraintSet] = None,
) -> RgopResult:
    """Portfolio maximizing the worst-case growth rate over W.

    Solved as a second-order cone program: minimize the norm of
    (1 - w'mu + a v, b v) subject to v >= ||Sigma^{1/2} w|| and w in W,
    which is a monotone transform of the closed-form growth rate.  Falls
    back to projected gradient on the plain simplex if the cone solve
    breaks down.

    Parameters
    ----------
    m : MarketMoments
        Per-period mean vector and covariance matrix.
    rho_bar : float
        Aggregate serial correlation.
    q : GrowthQuery
        Shortfall probability and horizon.
    W : PortfolioConstraintSet, optional
        Defaults to the plain simplex on m's assets.

    Returns
    -------
    RgopResult
        Optimal portfolio, its growth rate, and whether the feasibility
        precondition was certified over all of W (not just at the point).

    Raises
    ------
    PreconditionViolated
        If the mean margin fails at the returned point or, on the plain
        simplex, at any vertex.
    InfeasibleConstraints
        If W is empty.
    ConvergenceFailure
        If no solution route converges.
    """
    if W is None:
        W = PortfolioConstraintSet.simplex(m.n_assets)
    if W.n_assets != m.n_assets:
        raise InfeasibleConstraints(
            f"weight set has {W.n_assets} assets, market has {m.n_assets}"
        )
    a, b = _risk_coefficients(rho_bar, q)
    n = m.n_assets
    n_total = n + 2
    i_v, i_s = n, n + 1

    chol_t = np.linalg.cholesky(m.sigma).T
    objective = np.zeros(n_total)
    objective[i_s] = -1.0

    M2 = np.zeros((3, n_total))
    M2[0, i_s] = 1.0
    M2[1, :n] = -m.mu
    M2[1, i_v] = a
    M2[2, i_v] = b
    norm_cone = SecondOrderConeConstraint(M2, np.array([0.0, 1.0, 0.0]))

    prob = ConicProblem(
        variable_count=n_total,
        objective=objective,
        linear_constraints=tuple(_box_rows(W, n_total)),
        soc_constraints=(_variance_cone(chol_t, n_total, i_v), norm_cone),
    )

    weights = None
    # Two-route value agreement needs a tight gap; retry looser before
    # falling back.
    for tol in (1e-10, 1e-7):
        try:
            sol = _solve(prob, "growth-optimal portfolio", tol=tol)
        except NumericalFailure:
            continue
        weights = np.clip(sol.variables[:n], W.lower_bounds, W.upper_bounds)
        weights = weights / weights.sum()
        break
    if weights is None:
        if not W.is_plain_simplex:
            raise ConvergenceFailure(
                "cone solve failed and no fallback applies off the simplex"
            )
        weights = _simplex_descent(m, a, b)

    certified = _certify_precondition(m, W, rho_bar, q)
    if certified is False:
        raise PreconditionViolated(
            "mean margin fails at a vertex of the weight set",
            margin=min(
                _margin_at(m, np.eye(n)[i], rho_bar, q) for i in range(n)
            ),
        )
    margin = _margin_at(m, weights, rho_bar, q)
    if margin <= 0.0:
        raise PreconditionViolated(
            "mean margin fails at the optimizer", margin=margin
        )
    p = ProjectedMoments(float(weights @ m.mu), float(weights @ m.sigma @ weights))
    growth = worst_case_growth_rate(p, rho_bar, q).growth_rate
    return RgopResult(
        portfolio=Portfolio(weights),
        growth_rate=growth,
        precondition_certified=bool(certified),
    )


def _min_variance(
    m: MarketMoments,
    W: PortfolioConstraintSet,
    target_return: Optional[float] = None,
) -> np.ndarray:
    n = m.n_assets
    n_total = n + 1
    chol_t = np.linalg.cholesky(m.sigma).T
    objective = np.zeros(n_total)
    objective[n] = -1.0
    rows = _box_rows(W, n_total)
    if target_return is not None:
        r = np.zeros(n_total)
        r[:n] = m.mu
        rows.append(LinearConstraint(r, Relation.EQ, float(target_return)))
    prob = ConicProblem(
        variable_count=n_total,
        objective=objective,
        linear_constraints=tuple(rows),
        soc_constraints=(_variance_cone(chol_t, n_total, n),),
    )
    sol = _solve(prob, "minimum-variance portfolio")
    w = np.clip(sol.variables[:n], W.lower_bounds, W.upper_bounds)
    return w / w.sum()


def _max_return(m: MarketMoments, W: PortfolioConstraintSet) -> np.ndarray:
    n = m.n_assets
    objective = m.mu.copy()
    prob = ConicProblem(
        variable_count=n,
        objective=objective,
        linear_constraints=tuple(_box_rows(W, n)),
    )
    sol = _solve(prob, "maximum-return portfolio")
    w = np.clip(sol.variables, W.lower_bounds, W.upper_bounds)
    return w / w.sum()


def _frontier_point(m: MarketMoments, w: np.ndarray) -> FrontierPoint:
    return FrontierPoint(
        portfolio=Portfolio(w),
        expected_return=float(w @ m.mu),
        variance=float(w @ m.sigma @ w),
    )


def efficient_frontier(
    m: MarketMoments,
    W: Optional[PortfolioConstraintSet] = None,
    points: int = 30,
) -> list:
    """Trace the mean-variance frontier from the minimum-variance portfolio
    to the maximum-return portfolio.

    Interior points solve min w'Sigma w subject to w'mu = r for equally
    spaced targets r; the two endpoints are solved directly.
    """
    if points < 2:
        raise ValueError(f"need at least 2 frontier points, got {points}")
    if W is None:
        W = PortfolioConstraintSet.simplex(m.n_assets)
    if W.n_assets != m.n_assets:
        raise InfeasibleConstraints(
            f"weight set has {W.n_assets} assets, market has {m.n_assets}"
        )
    w_lo = _min_variance(m, W)
    w_hi = _max_return(m, W)
    r_lo, r_hi = float(w_lo @ m.mu), float(w_hi @ m.mu)
    out = [_frontier_point(m, w_lo)]
    if r_hi - r_lo < 1e-12 * max(1.0, abs(r_hi)):
        return out + [_frontier_point(m, w_lo) for _ in range(points - 1)]
    targets = np.linspace(r_lo, r_hi, points)
    for r in targets[1:-1]:
        out.append(_frontier_point(m, _min_variance(m, W, float(r))))
    out.append(_frontier_point(m, w_hi))
    return out


def annotate_growth(
    frontier: Sequence[FrontierPoint], rho_bar: float, q: GrowthQuery
) -> list:
    """Fill each point's growth rate from its scalar moments."""
    out = []
    for k, pt in enumerate(frontier):
        p = ProjectedMoments(pt.expected_return, pt.variance)
        try:
            g = worst_case_growth_rate(p, rho_bar, q).growth_rate
        except PreconditionViolated as exc:
            raise PreconditionViolated(
                f"mean margin fails at frontier point {k} "
                f"(return {pt.expected_return:.6g}): {exc}",
                margin=exc.margin,
            ) from exc
        out.append(replace(pt, growth_rate=g))
    return out
