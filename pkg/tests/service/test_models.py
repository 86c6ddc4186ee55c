"""Tests for the models module."""

import math

import pytest
from pydantic import BaseModel, ValidationError

from src.service.models import (
    DEFAULT_RHO,
    BoundaryCondition,
    CollarDiscretization,
    Criterion,
    DomainSpec,
    ExperimentConfig,
    ExperimentSummary,
    HGrid,
    IntervalProblem,
    RobinProblem,
    WeightedProblem,
)


class _Sweep(BaseModel):
    h_values: HGrid


# ============================================================================
# Problem descriptors
# ============================================================================


class TestIntervalProblem:
    def test_defaults_to_dirichlet(self):
        """Test that the cap condition defaults to Dirichlet."""
        assert IntervalProblem(length=5.0).cap == BoundaryCondition.DIRICHLET

    def test_length_above_one(self):
        """Test that interval lengths of at most one are rejected."""
        with pytest.raises(ValidationError):
            IntervalProblem(length=1.0)

    def test_frozen(self):
        """Test that interval problems are immutable."""
        prob = IntervalProblem(length=2.0)
        with pytest.raises(ValidationError):
            prob.length = 3.0


class TestWeightedProblem:
    def test_interval_length_from_rho(self):
        """Test that the interval length defaults to h^{ρ−1/2}."""
        prob = WeightedProblem(h=1e-4)
        assert prob.interval_length == pytest.approx(1e-4 ** (DEFAULT_RHO - 0.5))

    def test_length_override(self):
        """Test that an explicit length replaces the ρ rule."""
        assert WeightedProblem(h=1e-2, length=12.0).interval_length == 12.0

    @pytest.mark.parametrize("rho", [1 / 3, 0.5, 0.6])
    def test_rho_range(self, rho):
        """Test that ρ outside (1/3, 1/2) is rejected."""
        with pytest.raises(ValidationError):
            WeightedProblem(h=1e-2, rho=rho)

    def test_h_range(self):
        """Test that h must lie below one."""
        with pytest.raises(ValidationError):
            WeightedProblem(h=1.0)


class TestDomainSpec:
    def test_disk_boundary_length(self):
        """Test the boundary length of a disk of radius 2."""
        assert DomainSpec(kind="disk", radius=2.0).boundary_length == pytest.approx(4 * math.pi)

    def test_annulus_boundary_length(self):
        """Test that the annulus boundary length counts both circles."""
        domain = DomainSpec(kind="annulus", inner_radius=0.5)
        assert domain.boundary_length == pytest.approx(3 * math.pi)

    def test_curve_boundary_length_not_known(self):
        """Test that a general curve defers its length to the curve object."""
        with pytest.raises(ValueError, match="comes from the curve"):
            DomainSpec(kind="curve").boundary_length

    def test_inner_radius_range(self):
        """Test that inner radii outside (0, 1) are rejected."""
        with pytest.raises(ValidationError):
            DomainSpec(kind="annulus", inner_radius=1.5)


class TestRobinProblem:
    def test_window(self):
        """Test that the spectral window is εh²."""
        prob = RobinProblem(h=1e-2, domain=DomainSpec(kind="disk"), epsilon=2.0)
        assert prob.window == pytest.approx(2e-4)

    def test_default_window_is_zero(self):
        """Test that the window is zero by default."""
        assert RobinProblem(h=1e-2, domain=DomainSpec(kind="disk")).window == 0.0

    def test_negative_epsilon_rejected(self):
        """Test that a negative ε is rejected."""
        with pytest.raises(ValidationError):
            RobinProblem(h=1e-2, domain=DomainSpec(kind="disk"), epsilon=-1.0)


class TestCollarDiscretization:
    def test_depth_from_rho(self):
        """Test that the collar depth defaults to h^ρ."""
        disc = CollarDiscretization()
        assert disc.collar_depth(1e-4) == pytest.approx(1e-4**DEFAULT_RHO)

    def test_depth_override(self):
        """Test that an explicit depth is used as is."""
        assert CollarDiscretization(depth=0.3).collar_depth(1e-4) == 0.3

    def test_max_depth_curvature_below_one(self):
        """Test that depth times curvature must stay below one."""
        with pytest.raises(ValidationError):
            CollarDiscretization(max_depth_curvature=1.0)


# ============================================================================
# Criteria and summaries
# ============================================================================


class TestCriterion:
    @pytest.mark.parametrize(
        "value, comparison, expected",
        [
            (1.0, "le", True),
            (1.2, "le", False),
            (0.95, "ge", True),
            (0.8, "ge", False),
            (1.05, "abs_le", True),
            (0.85, "abs_le", False),
        ],
    )
    def test_evaluate(self, value, comparison, expected):
        """Test each comparison rule on both sides of its tolerance."""
        assert Criterion.evaluate(value, 1.0, 0.1, comparison) is expected

    def test_missing_value_fails(self):
        """Test that a missing value never passes."""
        assert Criterion.evaluate(None, 1.0, 0.1, "le") is False

    def test_nan_value_fails(self):
        """Test that NaN never passes."""
        assert Criterion.evaluate(math.nan, 1.0, 0.1, "ge") is False

    def test_build_sets_pass(self):
        """Test that build computes the pass flag."""
        criterion = Criterion.build("slope", 1.48, 1.5, 0.15, "abs_le")
        assert criterion.passed
        assert criterion.value == 1.48

    def test_build_drops_non_finite(self):
        """Test that non-finite values are stored as missing and fail."""
        criterion = Criterion.build("ratio", math.inf, 1.0)
        assert criterion.value is None
        assert not criterion.passed

    def test_report_only(self):
        """Test a report-only criterion."""
        criterion = Criterion.build("splitting", 3.0, 0.0, 0.0, "le", asserted=False)
        assert not criterion.asserted
        assert not criterion.passed

    def test_dump_uses_pass_alias(self):
        """Test that dumps use the "pass" key."""
        dumped = Criterion.build("n", 0, 0.0).model_dump(by_alias=True)
        assert dumped["pass"] is True
        assert "passed" not in dumped


class TestExperimentSummary:
    def test_round_trip_with_alias(self):
        """Test that a summary survives JSON with the pass alias."""
        summary = ExperimentSummary(
            experiment="weyl",
            status="passed",
            criteria=[Criterion.build("n", 0, 0.0)],
            version="0.1.0",
        )
        text = summary.model_dump_json(by_alias=True)
        assert '"pass":true' in text
        assert ExperimentSummary.model_validate_json(text) == summary

    def test_status_values(self):
        """Test that unknown statuses are rejected."""
        with pytest.raises(ValidationError):
            ExperimentSummary(experiment="weyl", status="done", criteria=[], version="0")


class TestExperimentConfig:
    def test_parameters_default_empty(self):
        """Test the defaults of an experiment configuration."""
        config = ExperimentConfig(experiment="weyl")
        assert config.parameters == {}
        assert config.output_dir is None


class TestHGrid:
    def test_geometric_sweep(self):
        """Test that a decreasing geometric sweep is accepted."""
        assert _Sweep(h_values=[1e-2, 1e-3]).h_values == [1e-2, 1e-3]

    def test_empty_rejected(self):
        """Test that an empty sweep is rejected."""
        with pytest.raises(ValidationError, match="h grid is required"):
            _Sweep(h_values=[])

    def test_ratio_rejected(self):
        """Test that consecutive h values must at least halve."""
        with pytest.raises(ValidationError, match="must decrease"):
            _Sweep(h_values=[1e-2, 9e-3])

    def test_h_at_least_one_rejected(self):
        """Test that h values of one or more are rejected."""
        with pytest.raises(ValidationError, match=r"must lie in \(0, 1\)"):
            _Sweep(h_values=[2.0, 0.5])
