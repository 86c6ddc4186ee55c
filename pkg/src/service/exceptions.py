"""
Exceptions thrown by the Robin spectral lab.
"""


class RobinLabError(Exception):
    """
    The super class of all Robin spectral lab related errors.
    """


class InvalidParameterError(RobinLabError):
    """
    An error thrown when an operation is called outside its preconditions.
    """


class CollarTooDeepError(InvalidParameterError):
    """
    An error thrown when a tubular collar is too deep for the boundary curvature.
    """


class BracketError(RobinLabError):
    """
    An error thrown when a root-finding bracket does not contain a sign change.
    """


class ConvergenceError(RobinLabError):
    """
    An error thrown when an eigensolver or a quadrature does not converge.
    """


class ResolutionError(RobinLabError):
    """
    An error thrown when a discretization is too coarse for the requested accuracy.
    """


class HypothesisViolationError(RobinLabError):
    """
    An error thrown when a mode does not satisfy the hypothesis of a decay estimate.
    """


class IncompleteSpectrumError(RobinLabError):
    """
    An error thrown when a count is requested beyond the computed eigenvalue window.
    """


class ConfigValidationError(RobinLabError):
    """
    An error thrown when an experiment configuration fails validation.
    """


class UnknownExperimentError(ConfigValidationError):
    """
    An error thrown when an experiment id is not registered.
    """
