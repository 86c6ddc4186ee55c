"""Tests for the effective-operator sandwich helpers."""

import numpy as np
import pytest

from src.experiments.sandwich import SandwichParameters, _effective, _side_holds, _smallest_c


@pytest.fixture
def params():
    return SandwichParameters(c_values=[1.0, 2.0], truncation=16)


def _point(values, h=1e-2, bc="neumann"):
    other = "dirichlet" if bc == "neumann" else "neumann"
    return {
        "h": h,
        "spectra": {
            bc: (np.asarray(values), np.zeros(len(values))),
            other: (np.array([]), np.array([])),
        },
    }


def _unscaled(reference, h=1e-2):
    return reference * h**1.5 - h


class TestSideHolds:
    def test_lower_side_at_the_reference(self, unit_circle, params):
        """Test that values at the lower reference satisfy the lower side."""
        reference = _effective(unit_circle, 1e-2, -1.0, params.truncation, 5)
        point = _point(_unscaled(reference))
        assert _side_holds(point, unit_circle, 1.0, params, "lower")

    def test_lower_side_fails_below_the_reference(self, unit_circle, params):
        """Test that values below the lower reference fail."""
        reference = _effective(unit_circle, 1e-2, -1.0, params.truncation, 5)
        point = _point(_unscaled(reference - 1.0))
        assert not _side_holds(point, unit_circle, 1.0, params, "lower")

    def test_upper_side(self, unit_circle, params):
        """Test the upper side on both sides of its reference."""
        reference = _effective(unit_circle, 1e-2, 1.0, params.truncation, 5)
        assert _side_holds(_point(_unscaled(reference), bc="dirichlet"), unit_circle, 1.0, params, "upper")
        assert not _side_holds(
            _point(_unscaled(reference + 1.0), bc="dirichlet"), unit_circle, 1.0, params, "upper"
        )

    def test_empty_side_holds(self, unit_circle, params):
        """Test that an empty side holds trivially."""
        assert _side_holds(_point([]), unit_circle, 1.0, params, "lower")


def test_effective_is_capped_by_truncation(unit_circle):
    """Test that at most 2K + 1 effective eigenvalues are returned."""
    assert _effective(unit_circle, 1e-2, 0.0, 8, 100).size == 17


def test_smallest_c(unit_circle, params):
    """Values between ℒ^{−2} and ℒ^{−1} are first bracketed at c = 2."""
    lower = _effective(unit_circle, 1e-2, -2.0, params.truncation, 5)
    upper = _effective(unit_circle, 1e-2, -1.0, params.truncation, 5)
    point = _point(_unscaled((lower + upper) / 2))
    assert _smallest_c([point], unit_circle, params, "lower") == 2.0
