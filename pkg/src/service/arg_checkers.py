# Shape follows https://github.com/kbase/cdm-task-service/blob/main/cdmtaskservice/arg_checkers.py

import math
from typing import Any, Sequence

from src.service.exceptions import InvalidParameterError


def not_falsy(obj: Any, name: str):
    """
    Check an argument is not falsy.

    obj - the argument to check.
    name - the name of the argument to use in exceptions.

    returns the object.
    """
    if not obj:
        raise InvalidParameterError(f"{name} is required")
    return obj


def check_positive(value: float, name: str) -> float:
    """
    Check a numeric argument is finite and strictly positive.

    value - the argument to check.
    name - the name of the argument to use in exceptions.

    returns the value.
    """
    if not math.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be positive, got {value}")
    return value


def check_open_unit(value: float, name: str) -> float:
    """
    Check a numeric argument lies in the open interval (0, 1).

    returns the value.
    """
    if not math.isfinite(value) or not 0 < value < 1:
        raise InvalidParameterError(f"{name} must lie in (0, 1), got {value}")
    return value


def check_geometric(values: Sequence[float], name: str, max_ratio: float = 0.5):
    """
    Check a parameter list is a decreasing geometric-like sweep.

    Consecutive ratios must not exceed max_ratio. A single value passes.

    values - the sweep to check.
    name - the name of the argument to use in exceptions.
    max_ratio - the largest allowed ratio between consecutive values.

    returns the values.
    """
    not_falsy(values, name)
    for value in values:
        check_positive(value, name)
    for previous, current in zip(values, values[1:]):
        if current / previous > max_ratio * (1 + 1e-9):
            raise InvalidParameterError(
                f"{name} must decrease by a factor of at least {1 / max_ratio:g}"
                f" between entries, got {previous:g} -> {current:g}"
            )
    return values
