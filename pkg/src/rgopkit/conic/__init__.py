"""Conic verification oracles: problem types, a dense interior-point
solver, and builders for the two growth-rate programs."""

from .builders import build_sdp, build_socp, compound_symmetric_projection
from .problem import (
    ConicProblem,
    ConicSolution,
    LinearConstraint,
    PsdConstraint,
    Relation,
    SecondOrderConeConstraint,
    SolveStatus,
)
from .solver import DEFAULT_TOL, solve_conic
from .verify import (
    MAX_SDP_HORIZON,
    ResidualReport,
    check_certificate,
    evaluate_point,
    exact_growth_rate,
    sdp_growth_rate,
    socp_growth_rate,
)

__all__ = [
    "ConicProblem",
    "ConicSolution",
    "LinearConstraint",
    "PsdConstraint",
    "Relation",
    "SecondOrderConeConstraint",
    "SolveStatus",
    "DEFAULT_TOL",
    "MAX_SDP_HORIZON",
    "ResidualReport",
    "build_sdp",
    "build_socp",
    "check_certificate",
    "compound_symmetric_projection",
    "evaluate_point",
    "exact_growth_rate",
    "sdp_growth_rate",
    "socp_growth_rate",
    "solve_conic",
]
