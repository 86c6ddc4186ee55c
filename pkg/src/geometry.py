"""
Smooth closed boundary curves in arc-length form, tubular coordinates and the collar metric.

A curve is built from a trigonometric parameterization z(θ) = Σ c_j e^{ijθ}. The arc length
s(θ) is integrated spectrally from the speed |z'(θ)|, inverted by Newton's method on a uniform
arc-length grid, and the curvature samples are stored together with their discrete Fourier
coefficients. Arc length runs over [0, 2L) starting at θ = 0; by periodicity this is the same
parameterization as s ∈ [−L, L).
"""

import logging
import math
from typing import Any, NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from src.service.arg_checkers import check_positive
from src.service.exceptions import (
    CollarTooDeepError,
    ConvergenceError,
    InvalidParameterError,
)
from src.service.models import CurveSpec

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 4096
TOTAL_CURVATURE_TOL = 1e-10
PERIMETER_TOL = 1e-9
DOCUMENT_COEFFICIENTS = 33
_NEWTON_MAX_ITER = 50


class TubularPoint(NamedTuple):
    """A point of the collar: arc length s and distance t ≥ 0 into the domain."""

    s: float
    t: float


class Curve:
    """
    A closed curve sampled uniformly in arc length.

    The domain lies to the left of the direction of travel and ν is the outward unit normal,
    so κ > 0 on a counter-clockwise circle and κ < 0 on the boundary of a hole.
    """

    def __init__(
        self,
        kind: str,
        params: dict[str, Any],
        terms: dict[int, complex],
        n_samples: int = DEFAULT_SAMPLES,
        orientation: int = 1,
        exact_curvature: float | None = None,
    ):
        if not terms:
            raise InvalidParameterError("a curve needs at least one Fourier term")
        self.kind = kind
        self.params = params
        self.n_samples = n_samples
        self.orientation = orientation
        self._js = np.array(sorted(terms), dtype=float)
        self._cs = np.array([complex(terms[j]) for j in sorted(terms)])

        theta = 2 * np.pi * np.arange(n_samples) / n_samples
        speed_hat = np.fft.fft(self._speed(theta)) / n_samples
        self._mean_speed = speed_hat[0].real
        self.perimeter = 2 * np.pi * self._mean_speed
        if self.perimeter <= 0:
            raise InvalidParameterError("curve has zero length")
        self._check_perimeter()

        freqs = np.fft.fftfreq(n_samples, d=1.0 / n_samples)
        keep = (freqs != 0) & (np.abs(freqs) < n_samples // 2)
        keep &= np.abs(speed_hat) > 1e-16 * abs(self._mean_speed)
        self._arc_freqs = freqs[keep]
        self._arc_coeffs = speed_hat[keep] / (1j * self._arc_freqs)

        # periodic part of θ(s), used as the Newton starting point
        s_of_theta = self._arc_length(theta)
        drift = theta - 2 * np.pi * s_of_theta / self.perimeter
        self._theta_spline = CubicSpline(
            np.append(s_of_theta, self.perimeter),
            np.append(drift, drift[0]),
            bc_type="periodic",
        )

        self.s_grid = self.perimeter * np.arange(n_samples) / n_samples
        self.theta_grid = self.theta_at(self.s_grid)
        if exact_curvature is not None:
            self.kappa_samples = np.full(n_samples, float(exact_curvature))
        else:
            self.kappa_samples = self._curvature_at_theta(self.theta_grid)
        if exact_curvature is not None:
            coeffs = np.zeros(n_samples, dtype=complex)
            coeffs[0] = exact_curvature
        else:
            coeffs = fourier_coefficients(self.kappa_samples)
        self.kappa_coeffs = coeffs

        total = self.total_curvature()
        if abs(total - orientation * 2 * np.pi) > TOTAL_CURVATURE_TOL:
            raise InvalidParameterError(
                f"total curvature {total:.12g} does not match {orientation * 2}π;"
                " the curve is not simple or has the wrong orientation"
            )
        logger.debug(
            "built %s curve: perimeter %.12g, κ in [%.6g, %.6g]",
            kind,
            self.perimeter,
            self.kappa_min,
            self.kappa_max,
        )

    # ------------------------------------------------------------------
    # parameterization

    def _z(self, theta: np.ndarray, derivative: int = 0) -> np.ndarray:
        phase = np.exp(1j * np.multiply.outer(np.asarray(theta, dtype=float), self._js))
        return phase @ (self._cs * (1j * self._js) ** derivative)

    def _speed(self, theta):
        return np.abs(self._z(theta, 1))

    def _arc_length(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        wave = np.exp(1j * np.multiply.outer(theta, self._arc_freqs)) - 1.0
        return self._mean_speed * theta + (wave @ self._arc_coeffs).real

    def _check_perimeter(self):
        value, err = quad(
            lambda th: float(self._speed(np.array([th]))[0]),
            0.0,
            2 * np.pi,
            epsabs=1e-13,
            epsrel=1e-13,
            limit=400,
        )
        if abs(value - self.perimeter) > PERIMETER_TOL * self.perimeter:
            raise ConvergenceError(
                f"perimeter quadrature disagrees: quad {value!r} (err {err:.2e})"
                f" vs spectral {self.perimeter!r}"
            )

    def _curvature_at_theta(self, theta: np.ndarray) -> np.ndarray:
        dz = self._z(theta, 1)
        d2z = self._z(theta, 2)
        return (np.conj(dz) * d2z).imag / np.abs(dz) ** 3

    def theta_at(self, s) -> np.ndarray:
        """Parameter θ of the points at arc length s (any real s, taken modulo the perimeter)."""
        s = np.mod(np.asarray(s, dtype=float), self.perimeter)
        turns = 2 * np.pi * s / self.perimeter
        theta = turns + self._theta_spline(s)
        for _ in range(_NEWTON_MAX_ITER):
            step = (self._arc_length(theta) - s) / self._speed(theta)
            theta = theta - step
            if np.all(np.abs(step) < 1e-15 * (1 + np.abs(theta))):
                return theta
        if np.max(np.abs(step)) > 1e-12:
            raise ConvergenceError("arc-length inversion did not converge")
        return theta

    # ------------------------------------------------------------------
    # geometry on the arc-length parameter

    @property
    def half_perimeter(self) -> float:
        """L = |Γ|/2."""
        return self.perimeter / 2

    @property
    def kappa_max(self) -> float:
        return float(self.kappa_samples.max())

    @property
    def kappa_min(self) -> float:
        return float(self.kappa_samples.min())

    @property
    def max_abs_curvature(self) -> float:
        return float(np.abs(self.kappa_samples).max())

    def total_curvature(self) -> float:
        """∫κ ds by the periodic trapezoid rule on the sample grid."""
        return float(self.perimeter * self.kappa_samples.mean())

    def curvature(self, s) -> np.ndarray:
        if self.kind == "circle":
            return np.full(np.shape(s), self.kappa_samples[0])
        return self._curvature_at_theta(self.theta_at(s))

    def point(self, s) -> np.ndarray:
        """M(s) as an array of shape (..., 2)."""
        z = self._z(self.theta_at(s))
        return np.stack([z.real, z.imag], axis=-1)

    def normal(self, s) -> np.ndarray:
        """Outward unit normal ν(s), shape (..., 2)."""
        dz = self._z(self.theta_at(s), 1)
        nu = -1j * dz / np.abs(dz)
        return np.stack([nu.real, nu.imag], axis=-1)

    def kappa_hat(self, k) -> np.ndarray:
        """Fourier coefficients of κ on the basis e^{iπks/L}; zero beyond the sampled band."""
        k = np.asarray(k, dtype=int)
        coeffs = self.kappa_coeffs[np.mod(k, self.n_samples)]
        return np.where(np.abs(k) < self.n_samples // 2, coeffs, 0.0)

    def sample_coefficients(self, values: np.ndarray) -> np.ndarray:
        """Fourier coefficients of a function sampled on s_grid."""
        return fourier_coefficients(values)


def fourier_coefficients(samples: np.ndarray) -> np.ndarray:
    """fft/N, with the conjugate symmetry of real samples enforced."""
    samples = np.asarray(samples)
    coeffs = np.fft.fft(samples, axis=-1) / samples.shape[-1]
    if np.isrealobj(samples):
        mirrored = np.conj(np.roll(coeffs[..., ::-1], 1, axis=-1))
        coeffs = 0.5 * (coeffs + mirrored)
    return coeffs


# ============================================================================
# Constructors
# ============================================================================


def make_circle(radius: float, hole: bool = False) -> Curve:
    """
    Circle of the given radius.

    With hole=True the circle bounds a hole: it is traversed clockwise and κ ≡ −1/radius.
    """
    if not math.isfinite(radius) or radius <= 0:
        raise InvalidParameterError(f"radius must be positive, got {radius}")
    orientation = -1 if hole else 1
    return Curve(
        kind="circle",
        params={"radius": radius, "hole": hole},
        terms={orientation: complex(radius)},
        orientation=orientation,
        exact_curvature=orientation / radius,
    )


def make_ellipse(a: float, b: float) -> Curve:
    """Ellipse with semi-axes a ≥ b > 0; s = 0 sits at the vertex (a, 0)."""
    check_positive(b, "b")
    if not math.isfinite(a) or a < b:
        raise InvalidParameterError(f"ellipse needs a >= b > 0, got a={a}, b={b}")
    terms = {1: complex((a + b) / 2)}
    if a > b:
        terms[-1] = complex((a - b) / 2)
    return Curve(kind="ellipse", params={"a": a, "b": b}, terms=terms)


def make_fourier_curve(coefficients) -> Curve:
    """
    Curve z(θ) = Σ c_j e^{ijθ}.

    coefficients - either a mapping j -> complex c_j or a list of (j, re, im) triples.
    """
    if isinstance(coefficients, dict):
        terms = {int(j): complex(c) for j, c in coefficients.items()}
    else:
        terms = {}
        for j, re, im in coefficients:
            terms[int(j)] = terms.get(int(j), 0j) + complex(re, im)
    triples = [[j, c.real, c.imag] for j, c in sorted(terms.items())]
    return Curve(kind="fourier", params={"coefficients": triples}, terms=terms)


def curve_from_spec(spec: CurveSpec) -> Curve:
    """Build the curve a configuration describes."""
    if spec.kind == "circle":
        if spec.radius is None:
            raise InvalidParameterError("circle needs a radius")
        return make_circle(spec.radius)
    if spec.kind == "ellipse":
        if spec.a is None or spec.b is None:
            raise InvalidParameterError("ellipse needs both semi-axes")
        return make_ellipse(spec.a, spec.b)
    if not spec.coefficients:
        raise InvalidParameterError("fourier curve needs coefficients")
    return make_fourier_curve(spec.coefficients)


# ============================================================================
# Tubular coordinates
# ============================================================================


def metric(curve: Curve, s, t):
    """
    a(s, t) = 1 − tκ(s), the area factor of the tubular coordinates.

    Raises CollarTooDeepError where the factor is not positive.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise InvalidParameterError("t must be non-negative")
    a = 1.0 - t_arr * curve.curvature(s)
    if np.any(a <= 0):
        raise CollarTooDeepError(
            f"1 - tκ(s) <= 0 (min {np.min(a):.3g}); the collar is deeper than 1/κ"
        )
    return a if np.ndim(a) else float(a)


def embed(curve: Curve, p: TubularPoint) -> np.ndarray:
    """Euclidean position M(s) − tν(s) of a collar point."""
    if p.t < 0:
        raise InvalidParameterError("t must be non-negative")
    if p.t * max(curve.kappa_max, 0.0) >= 1:
        raise CollarTooDeepError(
            f"t = {p.t} is beyond the injectivity radius 1/κ_max = {1 / curve.kappa_max}"
        )
    return curve.point(p.s) - p.t * curve.normal(p.s)


def transversal_energy(curve: Curve, h: float, s):
    """λ_h(s) = −h − h^{3/2}κ(s) − h²κ(s)²/2, the transversal ground energy along Γ."""
    kappa = curve.curvature(s)
    return -h - h**1.5 * kappa - 0.5 * h**2 * kappa**2


# ============================================================================
# JSON documents
# ============================================================================


def curve_to_document(curve: Curve) -> dict[str, Any]:
    """{kind, params, L, kappa_fourier} with the leading non-negative κ coefficients."""
    coeffs = curve.kappa_coeffs[:DOCUMENT_COEFFICIENTS]
    return {
        "kind": curve.kind,
        "params": dict(curve.params),
        "L": curve.half_perimeter,
        "kappa_fourier": [[float(c.real), float(c.imag)] for c in coeffs],
    }


def curve_from_document(doc: dict[str, Any], tol: float = 1e-9) -> Curve:
    """Rebuild a curve from its document and check it against the stored L and κ̂."""
    try:
        kind = doc["kind"]
        params = doc["params"]
        if kind == "circle":
            curve = make_circle(params["radius"], params.get("hole", False))
        elif kind == "ellipse":
            curve = make_ellipse(params["a"], params["b"])
        elif kind == "fourier":
            curve = make_fourier_curve(params["coefficients"])
        else:
            raise InvalidParameterError(f"unknown curve kind {kind!r}")
        stored_l = float(doc["L"])
        stored = np.array([complex(re, im) for re, im in doc["kappa_fourier"]])
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidParameterError(f"malformed curve document: {e}") from e
    if abs(curve.half_perimeter - stored_l) > tol * max(1.0, stored_l):
        raise InvalidParameterError(
            f"document L {stored_l!r} does not match rebuilt {curve.half_perimeter!r}"
        )
    rebuilt = curve.kappa_coeffs[: len(stored)]
    if len(stored) and np.max(np.abs(rebuilt - stored)) > tol:
        raise InvalidParameterError("document curvature coefficients do not match")
    return curve
