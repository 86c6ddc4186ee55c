"""Tests for the error mapping module."""

from src.service.error_mapping import (
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_NUMERICAL,
    ErrorMapping,
    map_error,
)
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


class TestMapError:
    """Tests for the map_error function."""

    def test_invalid_parameter_error(self):
        """Test the mapping of InvalidParameterError."""
        result = map_error(InvalidParameterError("bad h"))
        assert result.err_type == ErrorType.INVALID_PARAMETER
        assert result.exit_code == EXIT_CONFIG

    def test_collar_too_deep_error(self):
        """Test that CollarTooDeepError maps to a configuration exit."""
        result = map_error(CollarTooDeepError("deep"))
        assert result.err_type == ErrorType.COLLAR_TOO_DEEP
        assert result.exit_code == EXIT_CONFIG

    def test_bracket_error(self):
        """Test the mapping of BracketError."""
        result = map_error(BracketError("no sign change"))
        assert result.err_type == ErrorType.BRACKET_FAILED
        assert result.exit_code == EXIT_NUMERICAL

    def test_convergence_error(self):
        """Test the mapping of ConvergenceError."""
        result = map_error(ConvergenceError("eigsh"))
        assert result.err_type == ErrorType.NOT_CONVERGED
        assert result.exit_code == EXIT_NUMERICAL

    def test_resolution_error(self):
        """Test the mapping of ResolutionError."""
        result = map_error(ResolutionError("coarse"))
        assert result.err_type == ErrorType.INSUFFICIENT_RESOLUTION
        assert result.exit_code == EXIT_NUMERICAL

    def test_hypothesis_violation_error(self):
        """Test the mapping of HypothesisViolationError."""
        result = map_error(HypothesisViolationError("w too large"))
        assert result.err_type == ErrorType.HYPOTHESIS_VIOLATED
        assert result.exit_code == EXIT_NUMERICAL

    def test_incomplete_spectrum_error(self):
        """Test the mapping of IncompleteSpectrumError."""
        result = map_error(IncompleteSpectrumError("window"))
        assert result.err_type == ErrorType.INCOMPLETE_SPECTRUM
        assert result.exit_code == EXIT_NUMERICAL

    def test_config_validation_error(self):
        """Test the mapping of ConfigValidationError."""
        result = map_error(ConfigValidationError("schema"))
        assert result.err_type == ErrorType.CONFIG_VALIDATION_FAILED
        assert result.exit_code == EXIT_CONFIG

    def test_unknown_experiment_error(self):
        """Test the mapping of UnknownExperimentError."""
        result = map_error(UnknownExperimentError("nope"))
        assert result.err_type == ErrorType.UNKNOWN_EXPERIMENT
        assert result.exit_code == EXIT_CONFIG

    def test_base_error(self):
        """Test that the base error maps to a plain failure."""
        result = map_error(RobinLabError("generic"))
        assert result.err_type is None
        assert result.exit_code == EXIT_FAILURE

    def test_unmapped_error_subclass(self):
        """Test that unmapped subclasses fall back to a plain failure."""
        class CustomLabError(RobinLabError):
            pass

        result = map_error(CustomLabError("custom"))
        assert result.err_type is None
        assert result.exit_code == EXIT_FAILURE

    def test_error_mapping_named_tuple(self):
        """Test the fields of ErrorMapping."""
        mapping = ErrorMapping(err_type=ErrorType.NOT_CONVERGED, exit_code=3)
        assert mapping.err_type == ErrorType.NOT_CONVERGED
        assert mapping.exit_code == 3
