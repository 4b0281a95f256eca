"""
Error handling middleware: exceptions to exit codes and messages.
"""
import logging

from src.domain.exceptions import (
    ConfigurationError,
    InvariantViolationError,
    SnapshotError,
    SolverError,
    SpaceMismatchError,
    ThermodynamicStateError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INVARIANT = 4


class ErrorHandler:
    """Error handler middleware for consistent exit statuses."""

    @staticmethod
    def handle_configuration_error(error):
        """Handle configuration and snapshot errors."""
        return f"configuration error: {error}", EXIT_CONFIG

    @staticmethod
    def handle_solver_error(error: SolverError):
        """Handle solver non-convergence."""
        detail = f" after {error.iterations} iterations, residual {error.residual:.3e}" \
            if error.iterations else ""
        return f"solver failure: {error}{detail}", EXIT_SOLVER

    @staticmethod
    def handle_invariant_error(error):
        """Handle invariant violations and invalid thermodynamic states."""
        return f"invariant violation: {error}", EXIT_INVARIANT

    @staticmethod
    def handle_unexpected_error(error):
        """Handle anything else."""
        return f"internal error: {type(error).__name__}: {error}", EXIT_FAILURE

    @classmethod
    def resolve(cls, error: BaseException):
        """(message, exit code) for an exception."""
        if isinstance(error, (ConfigurationError, SnapshotError, SpaceMismatchError)):
            return cls.handle_configuration_error(error)
        if isinstance(error, SolverError):
            return cls.handle_solver_error(error)
        if isinstance(error, (InvariantViolationError, ThermodynamicStateError)):
            return cls.handle_invariant_error(error)
        return cls.handle_unexpected_error(error)

    @classmethod
    def handle(cls, error: BaseException) -> int:
        """Log the error and return its exit code."""
        message, code = cls.resolve(error)
        if code == EXIT_FAILURE:
            logger.exception(message)
        else:
            logger.error(message, extra={"exit_code": code})
        return code
