"""Tests for the exceptions module."""

import pytest

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


class TestExceptionHierarchy:
    """Every lab error derives from RobinLabError."""

    @pytest.mark.parametrize(
        "exc_class",
        [
            InvalidParameterError,
            CollarTooDeepError,
            BracketError,
            ConvergenceError,
            ResolutionError,
            HypothesisViolationError,
            IncompleteSpectrumError,
            ConfigValidationError,
            UnknownExperimentError,
        ],
    )
    def test_subclass_of_base(self, exc_class):
        """Test that each lab error derives from RobinLabError."""
        assert issubclass(exc_class, RobinLabError)

    def test_collar_too_deep_is_invalid_parameter(self):
        """Test that a too deep collar is a parameter error."""
        assert issubclass(CollarTooDeepError, InvalidParameterError)

    def test_unknown_experiment_is_config_error(self):
        """Test that an unknown experiment is a configuration error."""
        assert issubclass(UnknownExperimentError, ConfigValidationError)

    def test_message_kept(self):
        """Test that the message survives raising."""
        with pytest.raises(RobinLabError, match="collar"):
            raise CollarTooDeepError("collar too deep")
