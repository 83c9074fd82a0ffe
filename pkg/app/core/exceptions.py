"""
Unified exception module for the material-network engine.
"""
from typing import List, Optional


class ApplicationError(Exception):
    """Base exception for all application-level errors."""

    default_code: Optional[str] = None

    def __init__(self, message: str, error_code: str = None):
        self.message = message
        self.error_code = error_code or self.default_code
        super().__init__(message)

    def __str__(self):
        if self.error_code:
            return f"[{self.error_code}] {self.message}"
        return self.message

    def __repr__(self):
        return f"{self.__class__.__name__}(message={self.message!r}, error_code={self.error_code!r})"


class ValidationError(ApplicationError):
    """Raised when an argument violates an operation's preconditions."""
    default_code = "validation_error"


class ConfigurationError(ApplicationError):
    """Raised when a config or parameter file cannot be parsed or is inconsistent."""
    default_code = "configuration_error"


class NotFoundError(ApplicationError):
    """Raised when a referenced file or record does not exist."""
    default_code = "not_found"


class StaleCacheError(ApplicationError):
    """Raised when a backward pass is requested against an outdated forward cache."""

    def __init__(self, expected: int, found: Optional[int]):
        self.expected = expected
        self.found = found
        message = f"Forward cache revision {found} does not match network revision {expected}"
        super().__init__(message, error_code="stale_cache")


# --- Numerical failures ---

class ConvergenceError(ApplicationError):
    """Base exception for numerical non-convergence; callers may refine the step."""
    default_code = "convergence_error"


class SingularInterfaceError(ConvergenceError):
    """Raised when a laminate interface subsystem cannot be inverted."""
    default_code = "singular_interface"


class ReturnMappingError(ConvergenceError):
    """Raised when the local plastic return map fails to converge."""

    def __init__(self, message: str, residual: float = None):
        self.residual = residual
        super().__init__(message, error_code="return_mapping_failed")


class RefinementExhaustedError(ConvergenceError):
    """Raised when adaptive step refinement runs out of doublings."""

    def __init__(self, refinements: int, step: int = None):
        self.refinements = refinements
        self.step = step
        message = f"Step {step} failed after {refinements} refinements; state restored"
        super().__init__(message, error_code="refinement_exhausted")


class TrainingDivergedError(ApplicationError):
    """Raised when the training cost keeps increasing."""

    def __init__(self, epoch: int, history: List[float]):
        self.epoch = epoch
        self.history = list(history)
        tail = ", ".join(f"{value:.3e}" for value in self.history[-5:])
        message = f"Training diverged at epoch {epoch}; last costs: {tail}"
        super().__init__(message, error_code="training_diverged")
