"""
Domain exceptions.

Every error raised by the solver derives from VrmhdError so the CLI error
handler can map it to an exit code.
"""
from typing import Optional


class VrmhdError(Exception):
    """Base class for all solver errors."""


class ConfigurationError(VrmhdError, ValueError):
    """Invalid sizes, malformed run configuration or case/geometry mismatch."""

    def __init__(self, message: str, errors: Optional[dict] = None):
        super().__init__(message)
        self.errors = errors or {}


class DomainError(VrmhdError, ValueError):
    """Evaluation point outside the spline domain."""


class SpaceMismatchError(VrmhdError, TypeError):
    """A Field was passed to an operator expecting another space."""


class ThermodynamicStateError(VrmhdError):
    """Nonpositive density, temperature or thermodynamic weight."""


class SolverError(VrmhdError):
    """Linear or nonlinear solver failed to reach its tolerance."""

    def __init__(self, message: str, iterations: int = 0,
                 residual: float = float("nan"), substep: Optional[str] = None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.substep = substep

    def with_substep(self, substep: str) -> "SolverError":
        """Return a copy tagged with the Strang sub-step that failed."""
        return SolverError(str(self), self.iterations, self.residual, substep)

    def __str__(self):
        base = super().__str__()
        if self.substep:
            return f"[{self.substep}] {base}"
        return base


class InvariantViolationError(VrmhdError):
    """NaN, negative density or a conserved quantity drifting out of bounds."""


class SnapshotError(VrmhdError):
    """Snapshot file is truncated, of another version or another geometry."""
