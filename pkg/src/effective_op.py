"""
The effective boundary operator

    ℒ_h^c = −(h^{1/2} + c h^{3/4}) d²/ds² − κ(s) − ½h^{1/2}κ(s)² + c h^{7/8}

on ℝ/2Lℤ, discretized by Fourier-Galerkin on e^{iπks/L}/√(2L), |k| ≤ K.
"""

import logging
import math
from typing import NamedTuple

import numpy as np
from scipy.linalg import LinAlgError, eigh, toeplitz

from src.geometry import Curve, fourier_coefficients
from src.service.arg_checkers import check_positive
from src.service.exceptions import ConvergenceError, InvalidParameterError

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 64
TRUNCATION_TOL = 1e-12


class EffectiveOperator(NamedTuple):
    curve: Curve
    h: float
    c: float = 0.0
    truncation: int = DEFAULT_TRUNCATION


def fourier_mode_eigs(half_perimeter: float, n_max: int) -> np.ndarray:
    """λ_n^F(L): 0, then π²k²/L² twice for each k ≥ 1, first n_max values."""
    check_positive(half_perimeter, "L")
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be at least 1, got {n_max}")
    n = np.arange(1, n_max + 1)
    k = n // 2
    return (math.pi * k / half_perimeter) ** 2


def _wavenumbers(op: EffectiveOperator) -> np.ndarray:
    return np.arange(-op.truncation, op.truncation + 1)


def potential_samples(op: EffectiveOperator) -> np.ndarray:
    kappa = op.curve.kappa_samples
    return -kappa - 0.5 * math.sqrt(op.h) * kappa**2 + op.c * op.h**0.875


def truncation_flag(op: EffectiveOperator) -> bool:
    """True when |κ̂(2K)|/|κ̂(0)| exceeds the truncation tolerance."""
    lag = 2 * op.truncation
    if lag >= op.curve.n_samples // 2:
        return True
    ratio = abs(op.curve.kappa_hat(lag)) / abs(op.curve.kappa_hat(0))
    return bool(ratio > TRUNCATION_TOL)


def assemble(op: EffectiveOperator) -> np.ndarray:
    """
    Hermitian matrix of ℒ_h^c, size 2K+1.

    The kinetic part is diagonal; the potential enters as the Toeplitz matrix of its Fourier
    coefficients V̂(k − k').
    """
    check_positive(op.h, "h")
    if 4 * op.truncation + 1 > op.curve.n_samples:
        raise InvalidParameterError(
            f"truncation K={op.truncation} needs more than {op.curve.n_samples} curve samples"
        )
    k = _wavenumbers(op)
    lags = np.arange(2 * op.truncation + 1)
    v_hat = fourier_coefficients(potential_samples(op))
    column = v_hat[lags]
    row = v_hat[(-lags) % v_hat.size]
    matrix = toeplitz(column, row)
    if np.max(np.abs(matrix.imag)) < 1e-15:
        matrix = matrix.real
    kinetic = (math.sqrt(op.h) + op.c * op.h**0.75) * (math.pi * k / op.curve.half_perimeter) ** 2
    return matrix + np.diag(kinetic)


def eigs(op: EffectiveOperator, n_eigs: int) -> np.ndarray:
    """Lowest n_eigs min-max eigenvalues of ℒ_h^c."""
    size = 2 * op.truncation + 1
    if not 1 <= n_eigs <= size:
        raise InvalidParameterError(f"n_eigs must lie in 1..{size}, got {n_eigs}")
    if truncation_flag(op):
        logger.warning(
            "Fourier truncation K=%d is too small for the %s curve", op.truncation, op.curve.kind
        )
    try:
        return eigh(assemble(op), eigvals_only=True, subset_by_index=[0, n_eigs - 1])
    except LinAlgError as e:
        raise ConvergenceError(f"effective operator eigensolver failed: {e}") from e


def explicit_bounds(curve: Curve, h: float, k: int, c: float) -> tuple[float, float]:
    """
    Closed-form bounds on h^{−3/2}λ_n(𝒯_h) for n ∈ {2k, 2k+1}:

        −h^{−1/2} + π²k²L⁻²(1 ∓ ch^{1/4})h^{1/2} − κ_{max/min} + M_∓h^{1/2} ∓ ch^{7/8}

    with M_− = −max κ² and M_+ = −min κ².
    """
    kappa_sq = curve.kappa_samples**2
    sq = math.sqrt(h)
    kinetic = (math.pi * k / curve.half_perimeter) ** 2 * sq
    lower = (
        -1 / sq
        + kinetic * (1 - c * h**0.25)
        - curve.kappa_max
        - kappa_sq.max() * sq
        - c * h**0.875
    )
    upper = (
        -1 / sq
        + kinetic * (1 + c * h**0.25)
        - curve.kappa_min
        - kappa_sq.min() * sq
        + c * h**0.875
    )
    return lower, upper


def pair_splitting(eigenvalues) -> np.ndarray:
    """|λ_{2k+1} − λ_{2k}| for k = 1, 2, ... (1-based counting)."""
    lam = np.sort(np.asarray(eigenvalues, dtype=float))
    k_max = (lam.size - 1) // 2
    ks = np.arange(1, k_max + 1)
    return np.abs(lam[2 * ks] - lam[2 * ks - 1])
