"""
One-dimensional Robin model operators: the half-line, the interval with a Dirichlet or Neumann
cap, and the curvature-weighted operator −w⁻¹(w u')' with w(τ) = 1 − h^{1/2}βτ.

Eigenvalues of the interval problems come from their transcendental conditions; the weighted
operator is discretized with piecewise-linear elements (Robin built into the form), and its
ground state is compared with the explicit quasimode.
"""

import logging
import math
from typing import Callable, NamedTuple

import numpy as np
from scipy import sparse
from scipy.integrate import simpson
from scipy.linalg import eigh, null_space
from scipy.optimize import brentq
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from src.service.exceptions import (
    BracketError,
    ConvergenceError,
    InvalidParameterError,
    ResolutionError,
)
from src.service.models import (
    DEFAULT_RHO,
    BoundaryCondition,
    IntervalProblem,
    WeightedProblem,
)

logger = logging.getLogger(__name__)

ROOT_XTOL = 1e-15
MAX_WEIGHT_DEFECT = 0.5
MAX_HALFLINE_LENGTH = 12.0
QUASIMODE_POINTS = 20001
GAP_ELEMENTS = 1000
_SHIFT = -3.0


class HalflineSpectrum(NamedTuple):
    point_spectrum: tuple[float, ...]
    essential_threshold: float
    eigenfunction: Callable[[np.ndarray], np.ndarray]


class WeightedSpectrum(NamedTuple):
    """Richardson-extrapolated eigenvalues of the weighted operator and fine-grid vectors."""

    eigenvalues: np.ndarray
    errors: np.ndarray
    tau: np.ndarray
    vectors: np.ndarray
    flagged: bool


class Quasimode(NamedTuple):
    tau: np.ndarray
    values: np.ndarray
    mu_app: float
    c_h: float
    length: float
    beta: float
    h: float


class QuasimodeResidual(NamedTuple):
    """‖(ℋ − μ^app)v_h‖ split into the bulk part and the cutoff tail."""

    bulk: float
    tail: float
    total: float
    method: str
    resolved: bool


class GapReport(NamedTuple):
    lambda2: float
    deflated_min: float
    scaled_min: float
    lower_bound: float
    passed: bool


class ClosenessLine(NamedTuple):
    n: int
    weighted: float
    reference: float
    deviation: float
    bound: float
    passed: bool


# ============================================================================
# Half-line and interval problems
# ============================================================================


def halfline_ground_state(tau) -> np.ndarray:
    """u_1(τ) = √2 e^{−τ}, the normalized eigenfunction of −d²/dτ² with u'(0) = −u(0)."""
    return math.sqrt(2.0) * np.exp(-np.asarray(tau, dtype=float))


def halfline_spectrum() -> HalflineSpectrum:
    """σ = {−1} ∪ [0, ∞) for the Robin half-line operator."""
    return HalflineSpectrum(
        point_spectrum=(-1.0,),
        essential_threshold=0.0,
        eigenfunction=halfline_ground_state,
    )


def _check_length(length: float):
    if not length > 1:
        raise InvalidParameterError(f"interval length must exceed 1, got {length}")


def _root(func, lo: float, hi: float, label: str) -> float:
    f_lo, f_hi = func(lo), func(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(f"no sign change for {label} on ({lo!r}, {hi!r})")
    return brentq(func, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)


def _negative_root(prob: IntervalProblem) -> float:
    length = prob.length
    if prob.cap == BoundaryCondition.DIRICHLET:
        return _root(lambda mu: math.tanh(mu * length) - mu, 1e-12, 1.0, "tanh(μT) = μ")
    return _root(lambda mu: mu - 1.0 / math.tanh(mu * length), 1.0, 2.0, "μ = coth(μT)")


def interval_negative_eig(prob: IntervalProblem) -> float:
    """The unique negative eigenvalue −μ² of the capped interval."""
    _check_length(prob.length)
    return -_negative_root(prob) ** 2


def interval_eigenfunction(prob: IntervalProblem, tau) -> tuple[np.ndarray, np.ndarray]:
    """
    Normalized ground state and its derivative on (0, T), with u(0) > 0.

    Dirichlet cap: sinh(μ(T − τ)); Neumann cap: cosh(μ(T − τ)).
    """
    _check_length(prob.length)
    mu = _negative_root(prob)
    length = prob.length
    x = mu * (length - np.asarray(tau, dtype=float))
    if prob.cap == BoundaryCondition.DIRICHLET:
        norm_sq = math.sinh(2 * mu * length) / (4 * mu) - length / 2
        u, du = np.sinh(x), -mu * np.cosh(x)
    else:
        norm_sq = math.sinh(2 * mu * length) / (4 * mu) + length / 2
        u, du = np.cosh(x), -mu * np.sinh(x)
    scale = 1.0 / math.sqrt(norm_sq)
    return scale * u, scale * du


def positive_eig_bracket(
    cap: BoundaryCondition, length: float, n: int, stated: bool = False
) -> tuple[float, float]:
    """
    Interval (lo, hi) holding λ_n, n ≥ 2.

    The stated form ((2n−3)π/2T)² < λ_n < ((n−1)π/T)² is the one printed for both caps; it is
    correct for the Neumann cap. For the Dirichlet cap the roots of tan(ℓT) = ℓ give
    ((n−1)π/T)² < λ_n < ((2n−1)π/2T)².
    """
    if n < 2:
        raise InvalidParameterError("positive-eigenvalue brackets start at n = 2")
    if stated or cap == BoundaryCondition.NEUMANN:
        return ((2 * n - 3) * math.pi / (2 * length)) ** 2, ((n - 1) * math.pi / length) ** 2
    return ((n - 1) * math.pi / length) ** 2, ((2 * n - 1) * math.pi / (2 * length)) ** 2


def interval_positive_eigs(prob: IntervalProblem, n_max: int) -> np.ndarray:
    """λ_2..λ_{n_max}, each ℓ² root-solved inside its analytic bracket."""
    _check_length(prob.length)
    if n_max < 2:
        raise InvalidParameterError(f"n_max must be at least 2, got {n_max}")
    length = prob.length
    if prob.cap == BoundaryCondition.NEUMANN:

        def condition(ell):
            return math.cos(ell * length) + ell * math.sin(ell * length)

    else:

        def condition(ell):
            return math.sin(ell * length) - ell * math.cos(ell * length)

    eigs = []
    for n in range(2, n_max + 1):
        lo, hi = (math.sqrt(b) for b in positive_eig_bracket(prob.cap, length, n))
        try:
            ell = _root(condition, lo, hi, f"positive eigenvalue k={n - 2}")
        except BracketError as e:
            raise BracketError(f"{e} (cap {prob.cap.value}, T={length})") from e
        eigs.append(ell * ell)
    return np.array(eigs)


def halfline_length(h: float, beta: float) -> float:
    """
    Stretched interval length for comparisons with the half-line expansion.

    Long enough that e^{−2T} is negligible, short enough that |β|h^{1/2}T stays below 1/2.
    """
    if beta == 0:
        return MAX_HALFLINE_LENGTH
    return min(MAX_HALFLINE_LENGTH, 0.45 * h**-0.5 / abs(beta))


# ============================================================================
# Weighted operator
# ============================================================================


def _check_weight(h: float, beta: float, length: float):
    _check_length(length)
    defect = abs(beta) * math.sqrt(h) * length
    if defect >= MAX_WEIGHT_DEFECT:
        raise InvalidParameterError(
            f"weight 1 - h^(1/2)βτ leaves (1/2, 3/2) on (0, T): |β|h^(1/2)T = {defect:.3g}"
        )


def weight(h: float, beta: float, tau) -> np.ndarray:
    return 1.0 - math.sqrt(h) * beta * np.asarray(tau, dtype=float)


def assemble_weighted(
    h: float, beta: float, length: float, n_elements: int, cap: BoundaryCondition
) -> tuple[sparse.csc_matrix, sparse.csc_matrix, np.ndarray]:
    """
    Stiffness K and mass M of the weighted form with piecewise-linear elements.

    Both integrals are exact for the linear weight. The Robin term −|u(0)|² sits in K[0, 0];
    a Dirichlet cap drops the last node.
    """
    tau = np.linspace(0.0, length, n_elements + 1)
    delta = length / n_elements
    w = weight(h, beta, tau)
    wa, wb = w[:-1], w[1:]

    k_main = np.zeros(n_elements + 1)
    k_main[:-1] += (wa + wb) / (2 * delta)
    k_main[1:] += (wa + wb) / (2 * delta)
    k_off = -(wa + wb) / (2 * delta)
    k_main[0] -= 1.0

    m_main = np.zeros(n_elements + 1)
    m_main[:-1] += delta * (3 * wa + wb) / 12
    m_main[1:] += delta * (wa + 3 * wb) / 12
    m_off = delta * (wa + wb) / 12

    stiffness = sparse.diags([k_off, k_main, k_off], [-1, 0, 1], format="csc")
    mass = sparse.diags([m_off, m_main, m_off], [-1, 0, 1], format="csc")
    if cap == BoundaryCondition.DIRICHLET:
        stiffness = stiffness[:-1, :-1]
        mass = mass[:-1, :-1]
    return stiffness, mass, tau


def _solve_weighted(
    h: float, beta: float, length: float, n_elements: int, cap: BoundaryCondition, n_eigs: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    stiffness, mass, tau = assemble_weighted(h, beta, length, n_elements, cap)
    size = stiffness.shape[0]
    if n_eigs >= size - 1:
        raise InvalidParameterError(f"{n_eigs} eigenvalues requested from a size-{size} problem")
    try:
        vals, vecs = eigsh(
            stiffness, k=n_eigs, M=mass, sigma=_SHIFT, which="LM", v0=np.ones(size)
        )
    except (ArpackNoConvergence, ArpackError) as e:
        raise ConvergenceError(f"weighted eigensolver failed: {e}") from e
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    if cap == BoundaryCondition.DIRICHLET:
        vecs = np.vstack([vecs, np.zeros((1, n_eigs))])
    vecs = vecs * np.where(vecs[0] < 0, -1.0, 1.0)
    return vals, vecs, tau


def weighted_eigs(
    prob: WeightedProblem, n_eigs: int, tol: float | None = None
) -> WeightedSpectrum:
    """
    Lowest n_eigs eigenvalues of the weighted operator.

    Values are Richardson-extrapolated from N and 2N elements, (4λ_{2N} − λ_N)/3, with the
    error estimate |λ_{2N} − λ_N|/3; eigenvectors come from the 2N grid, M-normalized and
    signed so that u(0) > 0. An estimate above tol sets the flagged field.
    """
    length = prob.interval_length
    _check_weight(prob.h, prob.beta, length)
    coarse, _, _ = _solve_weighted(
        prob.h, prob.beta, length, prob.n_elements, prob.cap, n_eigs
    )
    fine, vecs, tau = _solve_weighted(
        prob.h, prob.beta, length, 2 * prob.n_elements, prob.cap, n_eigs
    )
    values = (4 * fine - coarse) / 3
    errors = np.abs(fine - coarse) / 3
    flagged = bool(tol is not None and np.any(errors > tol))
    if flagged:
        logger.warning(
            "Richardson estimate %.3g above tolerance %.3g (h=%g, β=%g, N=%d)",
            errors.max(),
            tol,
            prob.h,
            prob.beta,
            prob.n_elements,
        )
    return WeightedSpectrum(
        eigenvalues=values, errors=errors, tau=tau, vectors=vecs, flagged=flagged
    )


def weighted_closeness_check(
    prob: WeightedProblem, n_max: int = 5
) -> list[ClosenessLine]:
    """|λ_n(β) − λ_n^T| against (1 + λ_n^T)h^ρ for n = 1..n_max on the same capped interval."""
    length = prob.interval_length
    interval = IntervalProblem(length=length, cap=prob.cap)
    reference = np.concatenate(
        [[interval_negative_eig(interval)], interval_positive_eigs(interval, n_max)]
    )
    weighted = weighted_eigs(prob, n_max).eigenvalues
    lines = []
    for n in range(1, n_max + 1):
        ref = float(reference[n - 1])
        dev = abs(float(weighted[n - 1]) - ref)
        bound = (1 + ref) * prob.h**prob.rho
        lines.append(
            ClosenessLine(
                n=n,
                weighted=float(weighted[n - 1]),
                reference=ref,
                deviation=dev,
                bound=bound,
                passed=dev <= bound,
            )
        )
    return lines


# ============================================================================
# Quasimode
# ============================================================================


def smoothstep_cutoff(x, derivative: int = 0) -> np.ndarray:
    """
    Even cutoff χ with χ = 1 on |x| ≤ 1/2 and χ = 0 on |x| ≥ 1, built from the quintic
    smoothstep S(y) = 6y⁵ − 15y⁴ + 10y³; derivatives are taken for x ≥ 0.
    """
    x = np.abs(np.asarray(x, dtype=float))
    y = np.clip(2 * x - 1, 0.0, 1.0)
    inside = (x > 0.5) & (x < 1.0)
    if derivative == 0:
        return 1.0 - (6 * y**5 - 15 * y**4 + 10 * y**3)
    if derivative == 1:
        return np.where(inside, -2 * 30 * y**2 * (y - 1) ** 2, 0.0)
    if derivative == 2:
        return np.where(inside, -4 * 60 * y * (2 * y - 1) * (y - 1), 0.0)
    raise InvalidParameterError("only derivatives up to order 2 are available")


def _approximate_state(h: float, beta: float, tau: np.ndarray):
    """u^app = P·u_1 with P = 1 + β²h(τ²/4 − 1/8), and its first two derivatives."""
    u1 = halfline_ground_state(tau)
    b2h = beta * beta * h
    p = 1 + b2h * (tau**2 / 4 - 1 / 8)
    dp = b2h * tau / 2
    d2p = b2h / 2
    return p * u1, (dp - p) * u1, (d2p - 2 * dp + p) * u1


def quasimode(
    h: float,
    beta: float,
    rho: float = DEFAULT_RHO,
    length: float | None = None,
    n_points: int = QUASIMODE_POINTS,
) -> Quasimode:
    """
    v_h = c_h χ(τ/T) u^app sampled on [0, T], normalized in the weighted norm, together with
    μ^app = −1 − βh^{1/2} − β²h/2.
    """
    prob = WeightedProblem(h=h, beta=beta, rho=rho, length=length)
    length = prob.interval_length
    _check_weight(h, beta, length)
    tau = np.linspace(0.0, length, n_points)
    u_app, _, _ = _approximate_state(h, beta, tau)
    shaped = smoothstep_cutoff(tau / length) * u_app
    norm_sq = simpson(shaped**2 * weight(h, beta, tau), x=tau)
    c_h = 1.0 / math.sqrt(norm_sq)
    return Quasimode(
        tau=tau,
        values=c_h * shaped,
        mu_app=-1.0 - beta * math.sqrt(h) - beta * beta * h / 2,
        c_h=c_h,
        length=length,
        beta=beta,
        h=h,
    )


def _weighted_norm(q: Quasimode, values: np.ndarray) -> float:
    return math.sqrt(simpson(values**2 * weight(q.h, q.beta, q.tau), x=q.tau))


def _exact_residual(q: Quasimode) -> tuple[np.ndarray, np.ndarray]:
    eps_beta = math.sqrt(q.h) * q.beta
    w = weight(q.h, q.beta, q.tau)
    u, du, d2u = _approximate_state(q.h, q.beta, q.tau)
    x = q.tau / q.length
    chi = smoothstep_cutoff(x)
    dchi = smoothstep_cutoff(x, 1) / q.length
    d2chi = smoothstep_cutoff(x, 2) / q.length**2
    drift = eps_beta / w
    bulk = q.c_h * chi * (-d2u + drift * du - q.mu_app * u)
    tail = q.c_h * (-d2chi * u - 2 * dchi * du + drift * dchi * u)
    return bulk, tail


def _fd_apply(h: float, beta: float, tau: np.ndarray, values: np.ndarray) -> np.ndarray:
    """−w⁻¹(w u')' by the conservative three-point stencil, endpoints extrapolated."""
    delta = tau[1] - tau[0]
    w_half = weight(h, beta, 0.5 * (tau[1:] + tau[:-1]))
    flux = w_half * np.diff(values) / delta
    out = np.empty_like(values)
    out[1:-1] = -np.diff(flux) / (delta * weight(h, beta, tau[1:-1]))
    out[0] = 2 * out[1] - out[2]
    out[-1] = 2 * out[-2] - out[-3]
    return out


def _fd_residual(q: Quasimode) -> tuple[np.ndarray, np.ndarray]:
    u, _, _ = _approximate_state(q.h, q.beta, q.tau)
    chi = smoothstep_cutoff(q.tau / q.length)
    total = _fd_apply(q.h, q.beta, q.tau, q.values) - q.mu_app * q.values
    bulk = q.c_h * chi * (_fd_apply(q.h, q.beta, q.tau, u) - q.mu_app * u)
    return bulk, total - bulk


def quasimode_residual(
    h: float,
    beta: float,
    rho: float = DEFAULT_RHO,
    length: float | None = None,
    method: str = "exact",
    n_points: int = QUASIMODE_POINTS,
) -> QuasimodeResidual:
    """
    ‖(ℋ_{h,β} − μ^app)v_h‖ in the weighted norm.

    The bulk part c_h χ(ℋ − μ^app)u^app carries the h^{3/2} order; the tail collects the
    cutoff commutator. Both are evaluated on n_points and 2·n_points − 1 samples; a change of
    more than 10% marks the result unresolved.
    """
    if method not in ("exact", "finite-difference"):
        raise InvalidParameterError(f"unknown residual method {method!r}")
    evaluate = _exact_residual if method == "exact" else _fd_residual

    parts = []
    for points in (n_points, 2 * n_points - 1):
        q = quasimode(h, beta, rho, length, points)
        bulk, tail = evaluate(q)
        parts.append(
            (_weighted_norm(q, bulk), _weighted_norm(q, tail), _weighted_norm(q, bulk + tail))
        )
    (bulk0, _, total0), (bulk1, tail1, total1) = parts
    resolved = _close(bulk0, bulk1) and _close(total0, total1)
    if not resolved:
        logger.warning(
            "quasimode residual unresolved (h=%g, β=%g, %s): %.3g -> %.3g",
            h,
            beta,
            method,
            bulk0,
            bulk1,
        )
    return QuasimodeResidual(
        bulk=bulk1, tail=tail1, total=total1, method=method, resolved=resolved
    )


def _close(a: float, b: float, rel: float = 0.1) -> bool:
    scale = max(abs(a), abs(b))
    return scale < 1e-14 or abs(a - b) <= rel * scale


# ============================================================================
# Spectral gap
# ============================================================================


def gap_check(
    h: float,
    beta: float,
    rho: float = DEFAULT_RHO,
    length: float | None = None,
    cap: BoundaryCondition = BoundaryCondition.NEUMANN,
    n_elements: int = GAP_ELEMENTS,
    m_floor: float = 0.0,
) -> GapReport:
    """
    Smallest Rayleigh quotient of the weighted form on the complement of the quasimode.

    The constraint ⟨u, v_h⟩ = 0 in the weighted inner product is b·u = 0 with b = M v_h; the
    form is restricted to the null space of bᵀ and minimized densely. The report compares
    the minimum times h^{2ρ−1} against m_floor and λ₂ against (π²/8)h^{1−2ρ}.
    """
    prob = WeightedProblem(h=h, beta=beta, rho=rho, length=length, cap=cap)
    length = prob.interval_length
    _check_weight(h, beta, length)
    stiffness, mass, tau = assemble_weighted(h, beta, length, n_elements, cap)
    stiffness, mass = stiffness.toarray(), mass.toarray()

    q = quasimode(h, beta, rho, length)
    v = np.interp(tau, q.tau, q.values)
    if cap == BoundaryCondition.DIRICHLET:
        v = v[:-1]
    b = mass @ v
    if not np.linalg.norm(b) > 0:
        raise ResolutionError("quasimode vanished on the element grid")
    basis = null_space(b[np.newaxis, :])
    k_red = basis.T @ stiffness @ basis
    m_red = basis.T @ mass @ basis
    deflated = float(eigh(k_red, m_red, eigvals_only=True, subset_by_index=[0, 0])[0])
    lambda2 = float(eigh(stiffness, mass, eigvals_only=True, subset_by_index=[1, 1])[0])

    # T² is h^{2ρ−1} for the unstretched length
    scale = length**2
    scaled = deflated * scale
    lower_bound = math.pi**2 / 8 / scale
    return GapReport(
        lambda2=lambda2,
        deflated_min=deflated,
        scaled_min=scaled,
        lower_bound=lower_bound,
        passed=scaled > m_floor and lambda2 >= lower_bound,
    )
