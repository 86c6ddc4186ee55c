"""
Map errors from exception type to custom error type and process exit code.
"""

# Structure follows https://github.com/kbase/cdm-task-service/blob/main/cdmtaskservice/error_mapping.py

from typing import NamedTuple

from src.service.errors import ErrorType
from src.service.exceptions import (
    BracketError,
    CollarTooDeepError,
    ConfigValidationError,
    ConvergenceError,
    HypothesisViolationError,
    IncompleteSpectrumError,
    InvalidParameterError,
    ResolutionError,
    RobinLabError,
    UnknownExperimentError,
)

EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ErrorMapping(NamedTuple):
    """The application error type and process exit code for an exception."""

    err_type: ErrorType | None
    """ The type of application error. None if the error is not a known family."""
    exit_code: int
    """ The exit code of the process. """


_ERR_MAP = {
    InvalidParameterError: ErrorMapping(ErrorType.INVALID_PARAMETER, EXIT_CONFIG),
    CollarTooDeepError: ErrorMapping(ErrorType.COLLAR_TOO_DEEP, EXIT_CONFIG),
    BracketError: ErrorMapping(ErrorType.BRACKET_FAILED, EXIT_NUMERICAL),
    ConvergenceError: ErrorMapping(ErrorType.NOT_CONVERGED, EXIT_NUMERICAL),
    ResolutionError: ErrorMapping(ErrorType.INSUFFICIENT_RESOLUTION, EXIT_NUMERICAL),
    HypothesisViolationError: ErrorMapping(
        ErrorType.HYPOTHESIS_VIOLATED, EXIT_NUMERICAL
    ),
    IncompleteSpectrumError: ErrorMapping(
        ErrorType.INCOMPLETE_SPECTRUM, EXIT_NUMERICAL
    ),
    ConfigValidationError: ErrorMapping(
        ErrorType.CONFIG_VALIDATION_FAILED, EXIT_CONFIG
    ),
    UnknownExperimentError: ErrorMapping(ErrorType.UNKNOWN_EXPERIMENT, EXIT_CONFIG),
    RobinLabError: ErrorMapping(None, EXIT_FAILURE),
}


def map_error(err: RobinLabError) -> ErrorMapping:
    """
    Map an error to an optional error type and an exit code.
    """
    mapping = _ERR_MAP.get(type(err))

    if not mapping:
        mapping = ErrorMapping(None, EXIT_FAILURE)

    return mapping
