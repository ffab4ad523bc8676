"""Builders for the two equivalent growth-rate verification programs.

Both maximize gamma, the per-horizon total growth bound; callers divide by T
to obtain the per-period rate... no: gamma here IS the growth rate value of
the closed form (the T-normalization is inside the constraints).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DimensionMismatch, NotCirculant
from ..growth import GrowthQuery
from ..market import CorrelationKind, ProjectedMoments
from .problem import (
    ConicProblem,
    LinearConstraint,
    PsdConstraint,
    Relation,
    SecondOrderConeConstraint,
)
from .solver import svec_dim

_SYM_TOL = 1e-10


def _svec_basis(k: int) -> np.ndarray:
    """Stack of symmetric matrices B_d with mat(x) = sum_d x_d B_d for the
    scaled-vector coordinates used by the solver."""
    d = svec_dim(k)
    out = np.zeros((d, k, k))
    m = 0
    r = 1.0 / math.sqrt(2.0)
    for i in range(k):
        for j in range(i + 1):
            if i == j:
                out[m, i, i] = 1.0
            else:
                out[m, i, j] = r
                out[m, j, i] = r
            m += 1
    return out


def svec_entries(M: np.ndarray) -> np.ndarray:
    """Coefficients of M in the `_svec_basis` expansion (inner products)."""
    basis = _svec_basis(M.shape[0])
    return np.tensordot(basis, M, axes=([1, 2], [0, 1]))


def build_sdp(omega: np.ndarray, q: GrowthQuery) -> ConicProblem:
    """Dual-moment semidefinite program whose optimum is the worst-case
    growth rate for the second-order moment matrix `omega`.

    Variables are (vec of the dual matrix M, beta, gamma), maximizing gamma,
    subject to
        beta + (1/eps) <omega, M>  <=  0
        M                          PSD
        M - [[I/2, -1/2], [-1/2', gamma T - beta]]  PSD
    """
    omega = np.asarray(omega, dtype=float)
    k = q.horizon + 1
    if omega.shape != (k, k):
        raise DimensionMismatch(
            f"moment matrix shape {omega.shape} does not match horizon "
            f"{q.horizon} (expected {(k, k)})"
        )
    if np.abs(omega - omega.T).max() > _SYM_TOL * max(1.0, np.abs(omega).max()):
        raise DimensionMismatch("moment matrix must be symmetric")
    T = q.horizon
    d = svec_dim(k)
    n = d + 2
    i_beta, i_gamma = d, d + 1

    objective = np.zeros(n)
    objective[i_gamma] = 1.0

    trade = np.zeros(n)
    trade[:d] = svec_entries(omega) / q.epsilon
    trade[i_beta] = 1.0
    moment_bound = LinearConstraint(trade, Relation.LE, 0.0)

    basis = _svec_basis(k)
    coeff = np.zeros((n, k, k))
    coeff[:d] = basis
    psd_m = PsdConstraint(coeff, np.zeros((k, k)))

    coeff2 = np.zeros((n, k, k))
    coeff2[:d] = basis
    coeff2[i_beta, T, T] = 1.0
    coeff2[i_gamma, T, T] = -float(T)
    shift = np.zeros((k, k))
    shift[:T, :T] = -0.5 * np.eye(T)
    shift[:T, T] = 0.5
    shift[T, :T] = 0.5
    psd_gap = PsdConstraint(coeff2, shift)

    return ConicProblem(
        variable_count=n,
        objective=objective,
        linear_constraints=(moment_bound,),
        psd_constraints=(psd_m, psd_gap),
    )


def build_socp(p: ProjectedMoments, q: GrowthQuery) -> ConicProblem:
    """Second-order-cone reduction of the dual-moment program, valid for
    cyclically wrapping lag profiles.

    Variables are (m_0 .. m_{T-1}, m_T, m_{T+1}, beta, gamma); the two
    hyperbolic constraints are encoded as rotated cones, the circulant
    symmetry links m_t = m_{T-t}, and one cosine inequality is emitted per
    nonzero frequency.
    """
    spec = p.spec
    if spec.kind is not CorrelationKind.CIRCULANT:
        raise NotCirculant(
            "the cone reduction applies only to cyclically wrapping profiles"
        )
    if spec.horizon != q.horizon:
        raise DimensionMismatch(
            f"profile has {spec.horizon} lags but the query horizon is "
            f"{q.horizon}"
        )
    T = q.horizon
    eps = q.epsilon
    mean, var = p.mean_return, p.variance
    rho = spec.rho

    n = T + 4
    i_mT, i_mlast, i_beta, i_gamma = T, T + 1, T + 2, T + 3

    objective = np.zeros(n)
    objective[i_gamma] = 1.0

    linear = []
    row = np.zeros(n)
    row[i_mlast] = 1.0
    linear.append(LinearConstraint(row, Relation.GE, 0.0))

    row = np.zeros(n)
    row[i_mlast] = 1.0
    row[i_gamma] = -float(T)
    row[i_beta] = 1.0
    linear.append(LinearConstraint(row, Relation.GE, 0.0))

    for t in range(1, T):
        if t < T - t:
            row = np.zeros(n)
            row[t] = 1.0
            row[T - t] = -1.0
            linear.append(LinearConstraint(row, Relation.EQ, 0.0))

    for j in range(1, T):
        row = np.zeros(n)
        row[0] = 1.0
        row[1:T] = np.cos(2.0 * np.pi * j * np.arange(1, T) / T)
        linear.append(LinearConstraint(row, Relation.GE, 0.5))

    row = np.zeros(n)
    row[:T] = T * (rho * var + mean * mean)
    row[i_mT] = 2.0 * T * mean
    row[i_mlast] = 1.0
    row[i_beta] = eps
    linear.append(LinearConstraint(row, Relation.LE, 0.0))

    # m_{T+1} * sum_t m_t >= T m_T^2
    M1 = np.zeros((3, n))
    M1[0, i_mlast] = 1.0
    M1[1, :T] = 1.0
    M1[2, i_mT] = math.sqrt(2.0 * T)
    hyp1 = SecondOrderConeConstraint(M1, np.zeros(3), rotated=True)

    # (m_{T+1} - gamma T + beta) (m_0 - 1/2 + sum_{t>=1} m_t) >= T (m_T+1/2)^2
    M2 = np.zeros((3, n))
    M2[0, i_mlast] = 1.0
    M2[0, i_gamma] = -float(T)
    M2[0, i_beta] = 1.0
    M2[1, :T] = 1.0
    M2[2, i_mT] = math.sqrt(2.0 * T)
    off2 = np.array([0.0, -0.5, math.sqrt(2.0 * T) * 0.5])
    hyp2 = SecondOrderConeConstraint(M2, off2, rotated=True)

    return ConicProblem(
        variable_count=n,
        objective=objective,
        linear_constraints=tuple(linear),
        soc_constraints=(hyp1, hyp2),
    )


def compound_symmetric_projection(x: np.ndarray, T: int) -> np.ndarray:
    """Average the first T coordinates onto the symmetric subspace
    m'_0 - 1/2 = m'_1 = ... = m'_{T-1}, preserving their sum and therefore
    the objective; the remaining coordinates pass through unchanged."""
    x = np.asarray(x, dtype=float)
    if x.size < T + 4:
        raise DimensionMismatch(
            f"expected at least {T + 4} coordinates, got {x.size}"
        )
    shared = (x[:T].sum() - 0.5) / T
    out = x.copy()
    out[:T] = shared
    out[0] = shared + 0.5
    return out
