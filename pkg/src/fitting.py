"""
Least-squares order fits used by every asymptotic check.
"""

import logging
from typing import Sequence

import numpy as np

from src.service.exceptions import InvalidParameterError
from src.service.models import FitReport

logger = logging.getLogger(__name__)

MIN_FIT_SAMPLES = 4


def fit_order(
    xs: Sequence[float],
    ys: Sequence[float],
    target_slope: float | None = None,
    tol: float | None = None,
    min_samples: int = MIN_FIT_SAMPLES,
) -> FitReport:
    """
    Fit log y = slope·log x + intercept by ordinary least squares.

    Args:
        xs: Positive abscissae, usually a geometric h sweep
        ys: Positive magnitudes
        target_slope: Declared slope the fit is checked against
        tol: Allowed deviation from the target slope
        min_samples: Smallest number of points accepted

    Returns:
        The fit, with the pass flag set when a target was given
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape:
        raise InvalidParameterError("xs and ys must have the same length")
    if x.size < min_samples:
        raise InvalidParameterError(
            f"at least {min_samples} samples are needed for a fit, got {x.size}"
        )
    if np.any(~np.isfinite(y)) or np.any(y <= 0):
        raise InvalidParameterError("fit magnitudes must be finite and positive")
    if np.any(x <= 0):
        raise InvalidParameterError("fit abscissae must be positive")

    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = ly - (slope * lx + intercept)
    passed = None
    if target_slope is not None:
        if tol is None:
            raise InvalidParameterError("a target slope needs a tolerance")
        passed = bool(abs(slope - target_slope) <= tol)
    report = FitReport(
        slope=float(slope),
        intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(residual**2))),
        samples=int(x.size),
        target=target_slope,
        tol=tol,
        passed=passed,
    )
    logger.debug("order fit %s", report)
    return report


def spread(values: Sequence[float]) -> float:
    """max/min of a list of positive constants; 1 means perfectly stable."""
    v = np.asarray(values, dtype=float)
    if v.size == 0 or np.any(v <= 0) or np.any(~np.isfinite(v)):
        raise InvalidParameterError("spread needs finite positive values")
    return float(v.max() / v.min())
