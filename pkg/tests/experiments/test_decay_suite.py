"""Tests for the decay suite criteria."""

import pytest

from src.experiments.decay_suite import DecaySuiteParameters, run
from src.experiments.runner import ExperimentContext


@pytest.fixture(scope="module")
def criteria(tmp_path_factory):
    """Criteria of a two-point decay sweep without the collar comparison."""
    context = ExperimentContext("decay-suite", tmp_path_factory.mktemp("decay"), workers=1)
    params = DecaySuiteParameters(h_values=[1e-3, 1e-4], collar_h=None)
    return {c.name: c for c in run(params, context)}


@pytest.mark.parametrize(
    "name", ["pointwise_bounded", "analytic_bounded", "polynomial_p2_growth", "polynomial_p4_growth"]
)
def test_bounds_are_asserted_and_hold(criteria, name):
    """Test that the sup bounds along the sweep are pass/fail criteria and pass on the disk."""
    assert criteria[name].asserted
    assert criteria[name].passed


def test_polynomial_growth_stays_near_one(criteria):
    """Test that the p = 4 weighted sup barely moves between h = 1e-3 and h = 1e-4."""
    assert 1.0 <= criteria["polynomial_p4_growth"].value < 3.0


def test_no_collar_comparison_without_collar_h(criteria):
    """Test that the collar rate criterion is only built when collar_h is set."""
    assert "collar_rate_deviation" not in criteria
