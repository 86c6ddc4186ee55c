"""
Error types reported by the Robin spectral lab.
"""

# Structure follows https://github.com/kbase/cdm-task-service/blob/main/cdmtaskservice/errors.py

from enum import Enum


class ErrorType(Enum):
    """
    The type of an error, consisting of an error code and a brief string describing the type.
    :ivar error_code: an integer error code.
    :ivar error_type: a brief string describing the error type.
    """

    INVALID_PARAMETER = (10000, "Invalid parameter")
    """ An operation was called outside its preconditions. """

    COLLAR_TOO_DEEP = (10010, "Collar too deep")
    """ The tubular collar is too deep for the boundary curvature. """

    BRACKET_FAILED = (20000, "Root bracket failed")
    """ A root-finding bracket has no sign change. """

    NOT_CONVERGED = (20010, "Solver did not converge")
    """ An eigensolver or quadrature did not converge. """

    INSUFFICIENT_RESOLUTION = (20020, "Insufficient resolution")
    """ A discretization is too coarse for the requested accuracy. """

    HYPOTHESIS_VIOLATED = (20030, "Hypothesis violated")
    """ A mode does not satisfy the hypothesis of a decay estimate. """

    INCOMPLETE_SPECTRUM = (20040, "Incomplete spectrum")
    """ A count was requested beyond the computed eigenvalue window. """

    CONFIG_VALIDATION_FAILED = (30010, "Configuration validation failed")
    """ An experiment configuration failed validation. """

    UNKNOWN_EXPERIMENT = (30020, "Unknown experiment")
    """ The experiment id is not registered. """

    def __init__(self, error_code, error_type):
        self.error_code = error_code
        self.error_type = error_type
