"""Cone-program intermediate representation and solution container.

A problem maximizes a linear objective subject to linear (in)equalities,
second-order-cone memberships of affine expressions, and positive
semidefiniteness of affine matrix expressions.  The representation is
solver-agnostic; `solver.solve_conic` is the built-in backend and any
external conic solver can be adapted from the JSON dump.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import DimensionMismatch

SCHEMA_VERSION = 1


class Relation(str, Enum):
    LE = "<="
    GE = ">="
    EQ = "=="


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical_failure"


def _frozen(a, dtype=float):
    out = np.asarray(a, dtype=dtype)
    out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class LinearConstraint:
    """coefficients @ x  <relation>  bound."""

    coefficients: np.ndarray
    relation: Relation
    bound: float

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _frozen(self.coefficients))
        object.__setattr__(self, "relation", Relation(self.relation))
        object.__setattr__(self, "bound", float(self.bound))


@dataclass(frozen=True)
class SecondOrderConeConstraint:
    """y = matrix @ x + offset must lie in a second-order cone.

    Plain cone: y_0 >= ||y_1:||.  Rotated cone: 2 y_0 y_1 >= ||y_2:||^2 with
    y_0, y_1 >= 0; a hyperbolic constraint a*b >= c^2 maps to the rotated
    cone via y = (a, b, sqrt(2) c).
    """

    matrix: np.ndarray
    offset: np.ndarray
    rotated: bool = False

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        d = np.atleast_1d(np.asarray(self.offset, dtype=float))
        if M.shape[0] != d.size:
            raise DimensionMismatch(
                f"cone dimension {M.shape[0]} does not match offset length {d.size}"
            )
        min_rows = 3 if self.rotated else 2
        if M.shape[0] < min_rows:
            raise DimensionMismatch(
                f"second-order cone needs at least {min_rows} rows, got {M.shape[0]}"
            )
        object.__setattr__(self, "matrix", _frozen(M))
        object.__setattr__(self, "offset", _frozen(d))

    @property
    def dim(self) -> int:
        return self.offset.size


@dataclass(frozen=True)
class PsdConstraint:
    """constant + sum_i x_i * coefficients[i] must be positive semidefinite."""

    coefficients: np.ndarray
    constant: np.ndarray

    def __post_init__(self):
        F = np.asarray(self.coefficients, dtype=float)
        F0 = np.atleast_2d(np.asarray(self.constant, dtype=float))
        if F.ndim != 3 or F.shape[1] != F.shape[2]:
            raise DimensionMismatch(
                "coefficients must be a stack of square matrices (n, k, k)"
            )
        if F0.shape != F.shape[1:]:
            raise DimensionMismatch(
                f"constant shape {F0.shape} does not match block size {F.shape[1:]}"
            )
        object.__setattr__(self, "coefficients", _frozen(F))
        object.__setattr__(self, "constant", _frozen(F0))

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """The affine matrix expression at x."""
        return self.constant + np.tensordot(x, self.coefficients, axes=(0, 0))


@dataclass(frozen=True)
class ConicProblem:
    """Linear maximization over an intersection of linear, second-order-cone
    and semidefinite constraints."""

    variable_count: int
    objective: np.ndarray
    linear_constraints: tuple = ()
    soc_constraints: tuple = ()
    psd_constraints: tuple = ()

    def __post_init__(self):
        n = int(self.variable_count)
        if n < 1:
            raise DimensionMismatch("variable_count must be >= 1")
        obj = np.atleast_1d(np.asarray(self.objective, dtype=float))
        if obj.shape != (n,):
            raise DimensionMismatch(
                f"objective length {obj.size} does not match variable_count {n}"
            )
        lin = tuple(self.linear_constraints)
        soc = tuple(self.soc_constraints)
        psd = tuple(self.psd_constraints)
        if not (lin or soc or psd):
            raise DimensionMismatch("problem must have at least one constraint")
        for con in lin:
            if con.coefficients.shape != (n,):
                raise DimensionMismatch("linear constraint has wrong width")
        for con in soc:
            if con.matrix.shape[1] != n:
                raise DimensionMismatch("cone constraint has wrong width")
        for con in psd:
            if con.coefficients.shape[0] != n:
                raise DimensionMismatch("psd constraint has wrong coefficient count")
        object.__setattr__(self, "variable_count", n)
        object.__setattr__(self, "objective", _frozen(obj))
        object.__setattr__(self, "linear_constraints", lin)
        object.__setattr__(self, "soc_constraints", soc)
        object.__setattr__(self, "psd_constraints", psd)

    def to_json_dict(self) -> dict:
        """Documented dump for debugging with external solvers.

        Schema (version 1):
          variable_count: int
          objective: [float] (maximize)
          linear: [{coefficients, relation, bound}]
          soc: [{matrix, offset, rotated}]; member y = matrix @ x + offset
          psd: [{coefficients (n x k x k), constant (k x k)}]
        """
        return {
            "schema_version": SCHEMA_VERSION,
            "variable_count": self.variable_count,
            "objective": self.objective.tolist(),
            "linear": [
                {
                    "coefficients": c.coefficients.tolist(),
                    "relation": c.relation.value,
                    "bound": c.bound,
                }
                for c in self.linear_constraints
            ],
            "soc": [
                {
                    "matrix": c.matrix.tolist(),
                    "offset": c.offset.tolist(),
                    "rotated": c.rotated,
                }
                for c in self.soc_constraints
            ],
            "psd": [
                {
                    "coefficients": c.coefficients.tolist(),
                    "constant": c.constant.tolist(),
                }
                for c in self.psd_constraints
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)

    @classmethod
    def from_json_dict(cls, data: dict) -> "ConicProblem":
        return cls(
            variable_count=data["variable_count"],
            objective=np.array(data["objective"]),
            linear_constraints=tuple(
                LinearConstraint(
                    np.array(c["coefficients"]), Relation(c["relation"]), c["bound"]
                )
                for c in data["linear"]
            ),
            soc_constraints=tuple(
                SecondOrderConeConstraint(
                    np.array(c["matrix"]), np.array(c["offset"]), c["rotated"]
                )
                for c in data["soc"]
            ),
            psd_constraints=tuple(
                PsdConstraint(np.array(c["coefficients"]), np.array(c["constant"]))
                for c in data["psd"]
            ),
        )


@dataclass(frozen=True)
class ConicSolution:
    """Solver output; `max_residual` is the worst normalized KKT residual
    (primal, dual, relative gap) at the returned point."""

    variables: np.ndarray
    objective_value: float
    status: SolveStatus
    max_residual: float
    iterations: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variables", _frozen(self.variables))
        object.__setattr__(self, "objective_value", float(self.objective_value))
        object.__setattr__(self, "status", SolveStatus(self.status))
        object.__setattr__(self, "max_residual", float(self.max_residual))
