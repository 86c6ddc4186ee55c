"""
Dirichlet-to-Neumann spectra, the Robin to Steklov correspondence, Weyl counting and
Rozenblum pairing checks.

The Bessel logarithmic derivatives here are shared with the exact disk and annulus solvers.
"""

import logging
import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import ive, kve

from src.fitting import fit_order
from src.service.exceptions import (
    IncompleteSpectrumError,
    InvalidParameterError,
)
from src.service.models import FitReport

logger = logging.getLogger(__name__)

J01 = 2.404825557695773
"""First zero of J_0; λ₁ᴰ of the unit disk is J01²."""

_SERIES_TERMS = 200


class DtnSpectrum(NamedTuple):
    """Eigenvalues μ of Λ(w) with their angular-mode tags (None when not exact)."""

    w: float
    mu: np.ndarray
    modes: tuple[int, ...] | None
    method: str


class WeylCount(NamedTuple):
    count: int
    prediction: float
    deviation: float


class RozenblumReport(NamedTuple):
    """Pairing of Steklov eigenvalues μ_{2k}, μ_{2k+1} against πk/L."""

    ks: np.ndarray
    pair_gaps: np.ndarray
    mode_deviation: np.ndarray
    max_pair_gap: float
    max_mode_deviation: float
    fit: FitReport | None


# ============================================================================
# Bessel logarithmic derivatives
# ============================================================================


def _series_logderiv(m: int, x: float, sign: float) -> float:
    """m + x S'(x)/S(x) for S = Σ (±x²/4)^j / (j!(m+1)_j)."""
    q = sign * x * x / 4
    term, total, weighted = 1.0, 1.0, 0.0
    for j in range(1, _SERIES_TERMS):
        term *= q / (j * (m + j))
        total += term
        weighted += 2 * j * term
        if abs(term) < 1e-17 * abs(total) and j > 2:
            break
    return m + weighted / total


def bessel_i_logderiv(m: int, x: float) -> float:
    """x I_m'(x)/I_m(x) = x I_{m−1}(x)/I_m(x) − m, in exponentially scaled arithmetic."""
    if x <= 0:
        return float(m)
    num, den = ive(m - 1, x), ive(m, x)
    if den < 1e-280 or not math.isfinite(num) or not math.isfinite(den):
        return _series_logderiv(m, x, 1.0)
    return float(x * num / den - m)


def bessel_k_logderiv(m: int, x: float) -> float:
    """x K_m'(x)/K_m(x) = −x K_{m−1}(x)/K_m(x) − m."""
    num, den = kve(m - 1, x), kve(m, x)
    if not (math.isfinite(num) and math.isfinite(den)) or den == 0:
        return math.nan
    return float(-x * num / den - m)


def bessel_j_logderiv(m: int, x: float) -> float:
    """x J_m'(x)/J_m(x) for 0 ≤ x < j_{0,1}, by the power series of J_m."""
    if x < 0 or x >= J01:
        raise InvalidParameterError(f"J branch needs 0 <= x < {J01}, got {x}")
    return _series_logderiv(m, x, -1.0)


# ============================================================================
# Disk DtN
# ============================================================================


def dtn_disk_eig(w: float, m: int, radius: float = 1.0) -> float:
    """
    μ_m(w), the eigenvalue of Λ(w) on the disk of the given radius in angular mode m.

    w < 0 uses the modified Bessel branch, w = 0 gives m/radius, and
    0 < w < j_{0,1}²/radius² uses the oscillatory branch.
    """
    if m < 0:
        raise InvalidParameterError(f"angular mode must be non-negative, got {m}")
    if w < 0:
        return bessel_i_logderiv(m, math.sqrt(-w) * radius) / radius
    if w == 0:
        return m / radius
    x = math.sqrt(w) * radius
    if x >= J01:
        raise InvalidParameterError(
            f"w = {w} is at or beyond the first Dirichlet eigenvalue {J01**2 / radius**2}"
        )
    return bessel_j_logderiv(m, x) / radius


def disk_dtn_spectrum(w: float, m_max: int, radius: float = 1.0) -> DtnSpectrum:
    """Sorted μ_m(w) for m = 0..m_max, modes m ≥ 1 listed twice."""
    entries = []
    for m in range(m_max + 1):
        mu = dtn_disk_eig(w, m, radius)
        entries.extend([(mu, m)] * (1 if m == 0 else 2))
    entries.sort()
    return DtnSpectrum(
        w=w,
        mu=np.array([e[0] for e in entries]),
        modes=tuple(e[1] for e in entries),
        method="bessel-exact",
    )


def annulus_dtn_count(h: float, r0: float, m: int) -> int:
    """
    Number of eigenvalues of Λ_m(0) on {r0 < |x| < 1} below h^{−1/2}.

    This is the exact number of negative Robin eigenvalues in angular mode m. Harmonic
    functions of the mode are spanned by r^{±m} (1 and log r for m = 0); Λ_m(0) maps
    the boundary values (u(1), u(r0)) to the outward normal derivatives.
    """
    if not 0 < r0 < 1:
        raise InvalidParameterError(f"inner radius must lie in (0, 1), got {r0}")
    gamma = h**-0.5
    if m == 0:
        values = np.array([[1.0, 0.0], [1.0, math.log(r0)]])
        normals = np.array([[0.0, 1.0], [0.0, -1.0 / r0]])
    else:
        values = np.array([[1.0, 1.0], [r0**m, r0**-m]])
        normals = np.array(
            [[m, -m], [-m * r0 ** (m - 1), m * r0 ** (-m - 1)]], dtype=float
        )
    dtn = normals @ np.linalg.inv(values)
    mus = np.linalg.eigvals(dtn).real
    return int(np.sum(mus < gamma))


# ============================================================================
# Robin <-> Steklov
# ============================================================================


def robin_to_steklov(h: float, lam: float) -> float:
    """μ = h^{−1}√(h + λ), the Steklov level matched to a Robin eigenvalue λ."""
    if lam < -h:
        raise InvalidParameterError(
            f"λ = {lam} lies below −h = {-h}; outside the Robin-Steklov correspondence"
        )
    return math.sqrt(h + lam) / h


def asymptotic_steklov(h: float, eigenvalues: Sequence[float]) -> DtnSpectrum:
    """Steklov values derived from Robin eigenvalues; never exact DtN eigenvalues."""
    mu = np.array([robin_to_steklov(h, lam) for lam in eigenvalues])
    return DtnSpectrum(w=0.0, mu=np.sort(mu), modes=None, method="asymptotic")


def weyl_count(spectrum, threshold: float) -> WeylCount:
    """
    N = #{λ_n < threshold} with the prediction (|Γ|/π)√(1 + threshold/h)h^{−1/2}.

    spectrum - a SpectrumResult; it must be complete below the threshold.
    """
    if threshold > spectrum.window:
        raise IncompleteSpectrumError(
            f"threshold {threshold} is above the computed window {spectrum.window}"
        )
    h = spectrum.h
    count = int(np.sum(np.asarray(spectrum.eigenvalues) < threshold))
    level = max(1.0 + threshold / h, 0.0)
    prediction = spectrum.boundary_length / math.pi * math.sqrt(level) * h**-0.5
    return WeylCount(count=count, prediction=prediction, deviation=count - prediction)


def rozenblum_check(
    half_perimeter: float,
    mu_list: Sequence[float],
    k_min: int = 1,
    k_max: int | None = None,
) -> RozenblumReport:
    """
    max_k |μ_{2k+1} − μ_{2k}| and max_k |μ_{2k} − πk/L| over k_min..k_max.

    mu_list is sorted and 1-based in the usual counting, so μ_{2k} is mu_list[2k − 1].
    A log-log fit of the pair gaps against k is attached when enough gaps are positive.
    """
    mu = np.sort(np.asarray(mu_list, dtype=float))
    available = (len(mu) - 1) // 2
    k_max = available if k_max is None else min(k_max, available)
    if k_max < k_min:
        raise InvalidParameterError("not enough Steklov values for the requested k range")
    ks = np.arange(k_min, k_max + 1)
    even, odd = mu[2 * ks - 1], mu[2 * ks]
    gaps = np.abs(odd - even)
    deviation = np.abs(even - np.pi * ks / half_perimeter)
    fit = None
    positive = gaps > 0
    if positive.sum() >= 4:
        fit = fit_order(ks[positive], gaps[positive])
    logger.debug("pairing k=%d..%d: max pair gap %.3g", k_min, k_max, gaps.max())
    return RozenblumReport(
        ks=ks,
        pair_gaps=gaps,
        mode_deviation=deviation,
        max_pair_gap=float(gaps.max()),
        max_mode_deviation=float(deviation.max()),
        fit=fit,
    )
