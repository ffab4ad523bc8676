"""Exception hierarchy shared by all rgopkit modules.

Every error carries a ``category`` used by the CLI to pick an exit code
(validation -> 2, numerical -> 3, io -> 4) and by the HTTP layer to pick a
status code.
"""

from __future__ import annotations


class RgopError(Exception):
    """Base class for all rgopkit errors."""

    category = "validation"

    @property
    def kind(self) -> str:
        return type(self).__name__


# ---------------------------------------------------------------------------
# validation errors (CLI exit code 2)
# ---------------------------------------------------------------------------

class RhoZeroNotOne(RgopError):
    """rho_0 of an autocorrelation spec must equal 1 exactly."""


class SymmetryViolation(RgopError):
    """Circulant-symmetric spec requires rho_t == rho_{T-t}."""


class NotPositiveDefinite(RgopError):
    """A matrix required to be positive definite is not."""

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class NotSymmetric(RgopError):
    """Operation requires a symmetric circulant first row."""


class NotCirculant(RgopError):
    """Operation requires a circulant-symmetric autocorrelation spec."""


class HorizonTooShort(RgopError):
    """Horizon T is too small for the requested operation."""


class HorizonTooLargeForSDP(RgopError):
    """Exact conic solves are capped at a configurable horizon."""


class DegenerateScale(RgopError):
    """1 + (T-1)*rho_bar must be positive (and rho_bar at most 1)."""


class DimensionMismatch(RgopError):
    """Vector/matrix dimensions are inconsistent."""


class TooFewObservations(RgopError):
    """Moment estimation needs at least N+1 return observations."""


class NonFiniteData(RgopError):
    """Input data contains NaN or infinite entries."""


class PreconditionViolated(RgopError):
    """The closed-form growth rate is undefined for these inputs."""

    def __init__(self, message: str, margin: float | None = None):
        super().__init__(message)
        self.margin = margin


class BothZero(RgopError):
    """relative_gap(a, b) is undefined when |a| + |b| == 0."""


class ZeroVariancePath(RgopError):
    """A simulated return path has zero sample variance."""


class InfeasibleConstraints(RgopError):
    """The portfolio constraint set is empty or the target unreachable."""


# ---------------------------------------------------------------------------
# numerical errors (CLI exit code 3)
# ---------------------------------------------------------------------------

class NumericalFailure(RgopError):
    """A conic solve did not reach the requested accuracy."""

    category = "numerical"

    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = trace or []


class ConvergenceFailure(NumericalFailure):
    """An iterative optimizer stalled before meeting its tolerance."""


class InternalConsistencyError(NumericalFailure):
    """Two independent code paths for the same quantity disagree."""


# ---------------------------------------------------------------------------
# I/O errors (CLI exit code 4)
# ---------------------------------------------------------------------------

class RgopIOError(RgopError):
    category = "io"


class MalformedRow(RgopIOError):
    """A CSV data row could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None):
        super().__init__(message)
        self.line_number = line_number


class EmptyFile(RgopIOError):
    """The returns file holds no usable data rows."""


class InconsistentColumnCount(RgopIOError):
    """A CSV row has a different number of columns than the header."""


EXIT_CODES = {"validation": 2, "numerical": 3, "io": 4}


def exit_code_for(err: BaseException) -> int:
    if isinstance(err, RgopError):
        return EXIT_CODES[err.category]
    if isinstance(err, OSError):
        return EXIT_CODES["io"]
    return 1
