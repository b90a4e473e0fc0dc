"""Exception types raised by dpflow."""

from typing import List, Optional


class DPFlowError(Exception):
    """Base class for all dpflow errors."""


class InvalidArgumentError(DPFlowError, ValueError):
    """An argument violates a documented precondition."""


class UnsupportedError(DPFlowError, NotImplementedError):
    """A requested element kind, order or rule is not available."""


class MeshParseError(DPFlowError, ValueError):
    """A mesh document could not be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


class DegenerateElementError(DPFlowError, ValueError):
    """An element has a non-positive Jacobian determinant."""

    def __init__(self, element: int, detail: str = ""):
        self.element = element
        super().__init__(f"degenerate element {element}{': ' + detail if detail else ''}")


class SingularMatrixError(DPFlowError, ArithmeticError):
    """The factorization met a zero (or negligible) pivot."""

    def __init__(self, dof: Optional[int], detail: str = ""):
        self.dof = dof
        where = f" at dof {dof}" if dof is not None else ""
        super().__init__(f"singular matrix{where}{': ' + detail if detail else ''}")


class SolverFailure(DPFlowError, RuntimeError):
    """A time-stepping driver could not complete a step."""

    def __init__(self, step: int, time: float, cause: Exception):
        self.step = step
        self.time = time
        self.cause = cause
        super().__init__(f"step {step} (t={time:.6g}) failed: {cause}")


class OracleFailure(DPFlowError, RuntimeError):
    """The radial reference solver did not converge."""

    def __init__(self, message: str, history: Optional[List[float]] = None):
        self.history = list(history or [])
        super().__init__(f"{message}; history={self.history}")


class InsufficientDataError(DPFlowError, ValueError):
    """Too few usable points for a fit."""


class ConfigError(DPFlowError, ValueError):
    """A run configuration is invalid."""


class AccuracyWarning(UserWarning):
    """A linear solve finished with a residual above tolerance."""
