"""
Process exit codes for application errors.
"""
from app.core.exceptions import (
    ApplicationError,
    ConfigurationError,
    ConvergenceError,
    NotFoundError,
    RefinementExhaustedError,
    ReturnMappingError,
    SingularInterfaceError,
    StaleCacheError,
    TrainingDivergedError,
    ValidationError,
)

EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_NON_CONVERGENCE = 2
EXIT_CONFIG_ERROR = 3

EXCEPTION_EXIT_CODE_MAP = {
    ConvergenceError: EXIT_NON_CONVERGENCE,
    SingularInterfaceError: EXIT_NON_CONVERGENCE,
    ReturnMappingError: EXIT_NON_CONVERGENCE,
    RefinementExhaustedError: EXIT_NON_CONVERGENCE,
    ConfigurationError: EXIT_CONFIG_ERROR,
    ValidationError: EXIT_CONFIG_ERROR,
    NotFoundError: EXIT_CONFIG_ERROR,
    StaleCacheError: EXIT_FAILURE,
    TrainingDivergedError: EXIT_FAILURE,
    ApplicationError: EXIT_FAILURE,
}


def get_exit_code_for_exception(exc: BaseException) -> int:
    """Exit code of the closest mapped class in the exception's MRO."""
    for cls in type(exc).__mro__:
        if cls in EXCEPTION_EXIT_CODE_MAP:
            return EXCEPTION_EXIT_CODE_MAP[cls]
    return EXIT_FAILURE
