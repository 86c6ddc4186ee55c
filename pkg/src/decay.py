"""
Localization checks for Robin eigenfunctions: fitted exponential rate, weighted energy
(Agmon) ratio and the pointwise bounds, all evaluated on an EigenMode grid.

Distances to the boundary are the t coordinate of the grid. Bessel modes cover the whole disk;
collar modes cover the collar only, and the checks then say nothing about the interior.
"""

import logging
import math
from typing import NamedTuple, Sequence

import numpy as np

from src.robin2d import EigenMode
from src.service.exceptions import HypothesisViolationError, ResolutionError
from src.service.models import DecayReport

logger = logging.getLogger(__name__)

FIT_WINDOW = (1.0, 6.0)
"""Rate fit window in units of √h."""
MIN_FIT_SAMPLES = 10
UNDERFLOW = 1e-300
RATE_TOL = 0.02
MAX_NORMALIZED_RATE = 1.05


class DecayFit(NamedTuple):
    rate: float
    normalized_rate: float
    quadratic_coefficient: float
    samples: int


class DecayParameters(NamedTuple):
    """Constants shared by the checks of one sweep."""

    alpha: float = 0.81
    big_m: float = 0.81
    powers: tuple[int, ...] = (0, 2, 4)
    epsilon: float = 0.0
    eps0: float = 0.5
    eta: float = 0.1
    exponent_shift: float = 0.0


def fit_decay_rate(mode: EigenMode, window: tuple[float, float] = FIT_WINDOW) -> DecayFit:
    """
    Least-squares rate r of log|u| ≈ c − r t on t ∈ [window[0]√h, window[1]√h].

    The ray through the largest boundary value is used. The quadratic coefficient q of
    log|u| ≈ c − r t − q t² on the same window is reported alongside.
    """
    sq = math.sqrt(mode.h)
    ray = mode.ray()
    mask = (mode.t >= window[0] * sq) & (mode.t <= window[1] * sq) & (ray > UNDERFLOW)
    samples = int(mask.sum())
    if samples < MIN_FIT_SAMPLES:
        raise ResolutionError(
            f"only {samples} usable samples in the decay window; need {MIN_FIT_SAMPLES}"
        )
    t, log_u = mode.t[mask], np.log(ray[mask])
    slope = np.polyfit(t, log_u, 1)[0]
    curvature = np.polyfit(t, log_u, 2)[0]
    rate = -float(slope)
    return DecayFit(
        rate=rate,
        normalized_rate=rate * sq,
        quadratic_coefficient=-float(curvature),
        samples=samples,
    )


def _check_agmon_hypothesis(mode: EigenMode, alpha: float, big_m: float, strict: bool):
    if not 0 < big_m < 1:
        raise HypothesisViolationError(f"M must lie in (0, 1), got {big_m}")
    if mode.w >= -big_m / mode.h:
        raise HypothesisViolationError(
            f"w = {mode.w:.6g} is not below −M/h = {-big_m / mode.h:.6g}"
        )
    if alpha < 0 or strict and alpha >= math.sqrt(big_m):
        raise HypothesisViolationError(f"α = {alpha} must lie in [0, √M) = [0, {math.sqrt(big_m):.6g})")


def agmon_ratio(
    mode: EigenMode, alpha: float, big_m: float, strict: bool = True
) -> float:
    """
    ∫(|u|² + h|∇u|²)e^{2αt/√h} dx / ∫|u|² dx.

    strict=False skips the α < √M requirement so that the weight can be pushed past the
    decay rate on purpose.
    """
    _check_agmon_hypothesis(mode, alpha, big_m, strict)
    weight = np.exp(2 * alpha * mode.t / math.sqrt(mode.h))
    density = mode.modulus**2
    energy = mode.integrate((density + mode.h * mode.grad_sq) * weight)
    return energy / mode.integrate(density)


def polynomial_bound_check(mode: EigenMode, p: int, epsilon: float) -> float:
    """sup |u|·(t²/h)^p over the grid, for modes with w ≤ ε."""
    if mode.w > epsilon:
        raise HypothesisViolationError(f"w = {mode.w:.6g} is above ε = {epsilon}")
    if p < 0:
        raise HypothesisViolationError(f"p must be non-negative, got {p}")
    scaled = (mode.t**2 / mode.h) ** p
    return float(np.max(mode.modulus * scaled))


def pointwise_prefactor_check(
    mode: EigenMode,
    alpha: float,
    big_m: float,
    eps0: float,
    exponent_shift: float = 0.0,
    strict: bool = True,
) -> float:
    """sup |u|·h^{3/4 + shift}·e^{α min(t, ε₀)/√h}."""
    _check_agmon_hypothesis(mode, alpha, big_m, strict)
    weight = np.exp(alpha * np.minimum(mode.t, eps0) / math.sqrt(mode.h))
    return float(np.max(mode.modulus * weight)) * mode.h ** (0.75 + exponent_shift)


def analytic_profile_check(mode: EigenMode, eta: float, epsilon: float) -> float:
    """sup |u|·h^{3/8}·e^{(1−η)min(t, ε)/√h}."""
    if not 0 < eta < 1:
        raise HypothesisViolationError(f"η must lie in (0, 1), got {eta}")
    weight = np.exp((1 - eta) * np.minimum(mode.t, epsilon) / math.sqrt(mode.h))
    return float(np.max(mode.modulus * weight)) * mode.h**0.375


def decay_report(
    mode: EigenMode,
    index: int,
    params: DecayParameters = DecayParameters(),
    curvature: float | None = None,
) -> DecayReport:
    """
    Every decay check of one mode.

    With a known boundary curvature κ the fitted rate is also compared to √(−w) − κ/2, the
    slope of the Jacobian-corrected profile.
    """
    fit = fit_decay_rate(mode)
    checks = {"normalized_rate": 0 < fit.normalized_rate <= MAX_NORMALIZED_RATE}
    if curvature is not None and mode.w < 0:
        expected = math.sqrt(-mode.w) - curvature / 2
        checks["rate_matches_w"] = abs(fit.rate - expected) <= RATE_TOL * math.sqrt(-mode.w)
    polynomial = {
        p: polynomial_bound_check(mode, p, params.epsilon) for p in params.powers
    }
    report = DecayReport(
        h=mode.h,
        index=index,
        w=mode.w,
        rate=fit.rate,
        normalized_rate=fit.normalized_rate,
        quadratic_coefficient=fit.quadratic_coefficient,
        polynomial_sup=polynomial,
        agmon_ratio=agmon_ratio(mode, params.alpha, params.big_m),
        pointwise_sup=pointwise_prefactor_check(
            mode, params.alpha, params.big_m, params.eps0, params.exponent_shift
        ),
        analytic_sup=analytic_profile_check(mode, params.eta, params.eps0),
        checks=checks,
    )
    logger.debug("decay report h=%g index=%d: r√h=%.6f", mode.h, index, fit.normalized_rate)
    return report


def bounded_along(values: Sequence[float], factor: float) -> bool:
    """True when a sweep of positive values never exceeds factor times its first entry."""
    values = np.asarray(values, dtype=float)
    return bool(np.all(np.isfinite(values)) and np.max(values) <= factor * values[0])


def profile_rows(mode: EigenMode) -> list[dict[str, float]]:
    """Rows (t, |u|, log|u|) along the ray through the largest boundary value."""
    ray = mode.ray()
    return [
        {"t": float(t), "abs_u": float(u), "log_abs_u": math.log(u)}
        for t, u in zip(mode.t, ray)
        if u > UNDERFLOW
    ]
