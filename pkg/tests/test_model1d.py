"""Tests for the one-dimensional model operators."""

import math

import numpy as np
import pytest

from src.model1d import (
    MAX_HALFLINE_LENGTH,
    gap_check,
    halfline_ground_state,
    halfline_length,
    halfline_spectrum,
    interval_eigenfunction,
    interval_negative_eig,
    interval_positive_eigs,
    positive_eig_bracket,
    quasimode,
    quasimode_residual,
    smoothstep_cutoff,
    weighted_closeness_check,
    weighted_eigs,
)
from src.fitting import fit_order
from src.service.exceptions import InvalidParameterError
from src.service.models import BoundaryCondition, IntervalProblem, WeightedProblem

DIRICHLET = BoundaryCondition.DIRICHLET
NEUMANN = BoundaryCondition.NEUMANN


# ============================================================================
# Half-line and interval problems
# ============================================================================


class TestHalfline:
    def test_spectrum(self):
        """Test the half-line spectrum: one eigenvalue −1 below the threshold 0."""
        spectrum = halfline_spectrum()
        assert spectrum.point_spectrum == (-1.0,)
        assert spectrum.essential_threshold == 0.0

    def test_ground_state_normalized(self):
        """Test that √2 e^{−τ} is normalized."""
        tau = np.linspace(0.0, 40.0, 400001)
        u = halfline_ground_state(tau)
        assert np.trapezoid(u**2, tau) == pytest.approx(1.0, rel=1e-6)
        assert u[0] == pytest.approx(math.sqrt(2.0))


class TestIntervalNegativeEig:
    @pytest.mark.parametrize("length, tol", [(5.0, 0.05), (10.0, 0.001)])
    def test_dirichlet_asymptotics(self, length, tol):
        """Test that λ + 1 behaves like 4e^{−2T} for a Dirichlet cap."""
        lam = interval_negative_eig(IntervalProblem(length=length, cap=DIRICHLET))
        assert abs((lam + 1) / (4 * math.exp(-2 * length)) - 1) <= tol

    def test_caps_on_either_side_of_minus_one(self):
        """Test that the Neumann cap lies below −1 and the Dirichlet cap above."""
        lam_d = interval_negative_eig(IntervalProblem(length=2.0, cap=DIRICHLET))
        lam_n = interval_negative_eig(IntervalProblem(length=2.0, cap=NEUMANN))
        assert lam_n < -1.0 < lam_d < 0.0

    @pytest.mark.parametrize("cap", [DIRICHLET, NEUMANN])
    def test_eigenfunction_robin_condition(self, cap):
        """Test the Robin condition and normalization of the eigenfunction."""
        prob = IntervalProblem(length=3.0, cap=cap)
        tau = np.linspace(0.0, 3.0, 30001)
        u, du = interval_eigenfunction(prob, tau)
        assert u[0] > 0
        assert du[0] == pytest.approx(-u[0], rel=1e-10)
        assert np.trapezoid(u**2, tau) == pytest.approx(1.0, rel=1e-6)

    def test_dirichlet_eigenfunction_vanishes_at_cap(self):
        """Test that the Dirichlet eigenfunction vanishes at τ = T."""
        u, _ = interval_eigenfunction(IntervalProblem(length=3.0), np.array([3.0]))
        assert u[0] == 0.0


class TestIntervalPositiveEigs:
    @pytest.mark.parametrize("cap", [DIRICHLET, NEUMANN])
    @pytest.mark.parametrize("length", [2.0, 5.0, 10.0])
    def test_inside_brackets(self, cap, length):
        """Test that every positive eigenvalue lies in its bracket."""
        values = interval_positive_eigs(IntervalProblem(length=length, cap=cap), 10)
        assert values.size == 9
        for n, lam in enumerate(values, start=2):
            lo, hi = positive_eig_bracket(cap, length, n)
            assert lo < lam < hi

    def test_neumann_second_eigenvalue(self):
        """Test the second Neumann eigenvalue at T = 5."""
        values = interval_positive_eigs(IntervalProblem(length=5.0, cap=NEUMANN), 2)
        assert math.sqrt(values[0]) == pytest.approx(0.38822, abs=1e-4)

    def test_dirichlet_above_neumann(self):
        """Test that Dirichlet eigenvalues lie above the Neumann ones index by index."""
        d = interval_positive_eigs(IntervalProblem(length=5.0, cap=DIRICHLET), 10)
        n = interval_positive_eigs(IntervalProblem(length=5.0, cap=NEUMANN), 10)
        assert np.all(n < d)

    def test_stated_bracket_differs_for_dirichlet(self):
        """Test that the stated Dirichlet bracket is shifted by one index."""
        derived = positive_eig_bracket(DIRICHLET, 5.0, 3)
        stated = positive_eig_bracket(DIRICHLET, 5.0, 3, stated=True)
        assert derived[0] == pytest.approx(stated[1])

    def test_bracket_index(self):
        """Test that brackets start at n = 2."""
        with pytest.raises(InvalidParameterError, match="start at n = 2"):
            positive_eig_bracket(NEUMANN, 5.0, 1)

    def test_n_max(self):
        """Test that n_max below 2 is rejected."""
        with pytest.raises(InvalidParameterError, match="n_max must be at least 2"):
            interval_positive_eigs(IntervalProblem(length=5.0), 1)


# ============================================================================
# Weighted operator
# ============================================================================


class TestWeightedEigs:
    def test_flat_weight_matches_interval(self):
        """Test that β = 0 reproduces the interval eigenvalue."""
        prob = WeightedProblem(h=1e-2, beta=0.0, length=6.0, cap=DIRICHLET)
        spectrum = weighted_eigs(prob, 3)
        exact = interval_negative_eig(IntervalProblem(length=6.0, cap=DIRICHLET))
        assert spectrum.eigenvalues[0] == pytest.approx(exact, abs=1e-7)
        assert spectrum.errors[0] < 1e-5
        assert not spectrum.flagged

    def test_first_eigenvalue_expansion(self):
        """Test the first eigenvalue against −1 − β√h − β²h/2."""
        h, beta = 1e-4, 1.0
        prob = WeightedProblem(
            h=h, beta=beta, length=halfline_length(h, beta), cap=DIRICHLET
        )
        lam = weighted_eigs(prob, 1).eigenvalues[0]
        mu_app = -1.0 - beta * math.sqrt(h) - beta * beta * h / 2
        assert abs(lam - mu_app) <= 2 * h**1.5

    def test_eigenvectors_signed(self):
        """Test that the ground state is positive."""
        spectrum = weighted_eigs(WeightedProblem(h=1e-3, beta=1.0), 2)
        assert np.all(spectrum.vectors[0] > 0)

    def test_weight_defect_rejected(self):
        """Test that a weight leaving (1/2, 3/2) is rejected."""
        prob = WeightedProblem(h=1e-2, beta=10.0, length=6.0)
        with pytest.raises(InvalidParameterError, match=r"leaves \(1/2, 3/2\)"):
            weighted_eigs(prob, 1)

    def test_closeness_lines(self):
        """Test the per-index closeness report."""
        lines = weighted_closeness_check(WeightedProblem(h=1e-4, beta=1.0, cap=DIRICHLET), 5)
        assert [line.n for line in lines] == [1, 2, 3, 4, 5]
        assert all(line.passed for line in lines[1:])


class TestHalflineLength:
    def test_flat(self):
        """Test that a flat weight uses the maximal length."""
        assert halfline_length(1e-2, 0.0) == MAX_HALFLINE_LENGTH

    def test_capped_by_weight(self):
        """Test that the weight caps the length."""
        assert halfline_length(1e-2, 1.0) == pytest.approx(4.5)


# ============================================================================
# Quasimode
# ============================================================================


class TestSmoothstepCutoff:
    def test_plateau_and_support(self):
        """Test the plateau, midpoint and support of the cutoff."""
        values = smoothstep_cutoff(np.array([0.0, 0.5, 0.75, 1.0, 1.5]))
        assert values[0] == 1.0
        assert values[1] == 1.0
        assert values[2] == pytest.approx(0.5)
        assert values[3] == 0.0
        assert values[4] == 0.0

    def test_derivative_matches_difference(self):
        """Test the first derivative against a central difference."""
        x = np.array([0.7])
        step = 1e-6
        numeric = (smoothstep_cutoff(x + step) - smoothstep_cutoff(x - step)) / (2 * step)
        assert smoothstep_cutoff(x, 1)[0] == pytest.approx(numeric[0], rel=1e-6)

    def test_third_derivative_rejected(self):
        """Test that only derivatives up to order 2 exist."""
        with pytest.raises(InvalidParameterError, match="up to order 2"):
            smoothstep_cutoff(0.7, 3)


class TestQuasimode:
    def test_normalized(self):
        """Test that the quasimode is normalized in the weighted norm."""
        q = quasimode(1e-3, 1.0)
        w = 1.0 - math.sqrt(q.h) * q.beta * q.tau
        assert np.trapezoid(q.values**2 * w, q.tau) == pytest.approx(1.0, rel=1e-6)

    def test_unperturbed_bulk_vanishes(self):
        """Test that β = 0 leaves no bulk residual."""
        assert quasimode_residual(1e-3, 0.0).bulk <= 1e-10

    def test_bulk_order(self):
        """Test that the bulk residual is of order h^{3/2}."""
        hs = [1e-2, 1e-3, 1e-4, 1e-5]
        bulk = [quasimode_residual(h, 1.0).bulk for h in hs]
        assert fit_order(hs, bulk, 1.5, 0.15).passed

    def test_methods_agree(self):
        """Test that the finite-difference residual agrees with the exact one."""
        exact = quasimode_residual(1e-3, 1.0)
        fd = quasimode_residual(1e-3, 1.0, method="finite-difference")
        assert fd.bulk == pytest.approx(exact.bulk, rel=0.1)

    def test_unknown_method(self):
        """Test that unknown residual methods are rejected."""
        with pytest.raises(InvalidParameterError, match="unknown residual method"):
            quasimode_residual(1e-3, 1.0, method="spectral")


class TestGapCheck:
    @pytest.mark.parametrize("beta", [1.0, -1.0])
    def test_second_eigenvalue_bound(self, beta):
        """Test the lower bound on the second eigenvalue."""
        report = gap_check(1e-3, beta)
        assert report.lambda2 >= report.lower_bound
        assert report.scaled_min == pytest.approx(report.deflated_min * (1e-3 ** (7 / 16 - 0.5)) ** 2)
