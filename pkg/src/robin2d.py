"""
Eigenvalues and eigenfunctions of 𝒯_h = −h²Δ with ∂u/∂ν = h^{−1/2}u.

Disks and annuli are solved exactly per angular mode with modified Bessel functions. General
curves use a boundary collar [0, 2L) × [0, δ] in tubular coordinates, discretized by a Fourier
basis in s and piecewise-linear elements in t; a Dirichlet condition at t = δ gives upper
bounds for the negative eigenvalues and a Neumann condition gives lower bounds.
"""

import logging
import math
from typing import Any, NamedTuple

import numpy as np
from cacheout.lru import LRUCache
from scipy import sparse
from scipy.integrate import simpson
from scipy.linalg import LinAlgError, eigh, toeplitz
from scipy.optimize import brentq
from scipy.sparse.linalg import (
    ArpackError,
    ArpackNoConvergence,
    LinearOperator,
    eigsh,
    splu,
)
from scipy.special import ive, kve

from src.geometry import Curve, fourier_coefficients, make_circle
from src.service.exceptions import (
    BracketError,
    CollarTooDeepError,
    ConvergenceError,
    InvalidParameterError,
    ResolutionError,
)
from src.service.models import (
    MAX_COLLAR_UNKNOWNS,
    BoundaryCondition,
    CollarDiscretization,
    RobinProblem,
)
from src.steklov import (
    J01,
    annulus_dtn_count,
    bessel_i_logderiv,
    bessel_j_logderiv,
    bessel_k_logderiv,
)

logger = logging.getLogger(__name__)

MODE_CACHE_SIZE = 4096
SCAN_START = 1e-3
SCAN_STEP = 0.01
DENSE_LIMIT = 4000
_GAUSS_POINTS, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(3)
_X_LO = 1e-12

_disk_mode_cache = LRUCache(maxsize=MODE_CACHE_SIZE)


class EigenTag(NamedTuple):
    """Per-eigenvalue metadata: angular mode or Fourier index, method, inner bc, error."""

    mode: int
    method: str
    inner_bc: str | None = None
    error: float | None = None
    component: str = "outer"


class SpectrumResult(NamedTuple):
    h: float
    eigenvalues: np.ndarray
    tags: tuple[EigenTag, ...]
    window: float
    boundary_length: float
    problem: dict[str, Any]
    discretization: dict[str, Any] | None = None
    payloads: tuple = ()


class EigenMode(NamedTuple):
    """
    One eigenfunction sampled on a structured (s, t) grid.

    t is the distance to the boundary. Radial modes use a single s row and a 2π angular
    measure. Collar modes use the uniform s grid with spacing ds.
    """

    eigenvalue: float
    w: float
    h: float
    mode: int
    method: str
    region: str
    s: np.ndarray
    t: np.ndarray
    modulus: np.ndarray
    grad_sq: np.ndarray
    jacobian: np.ndarray
    ds: float
    boundary_norm: float

    def integrate(self, field: np.ndarray) -> float:
        """∫ field dx over the sampled region."""
        rows = simpson(field * self.jacobian, x=self.t, axis=-1)
        return float(self.ds * np.sum(rows))

    def ray(self) -> np.ndarray:
        """|u| along the inward normal through the largest boundary value."""
        return self.modulus[int(np.argmax(self.modulus[:, 0]))]


# ============================================================================
# Disk
# ============================================================================


def _solve_disk_mode(h: float, m: int, radius: float, w_max: float) -> float | None:
    gamma = h**-0.5
    edge = m / radius
    if edge < gamma:

        def excess(x):
            return bessel_i_logderiv(m, x) / radius - gamma

        x_hi = radius * gamma + 1.0
        for _ in range(60):
            if excess(x_hi) > 0:
                break
            x_hi *= 2
        else:
            raise BracketError(f"no upper bracket for disk mode m={m}, h={h}")
        x = brentq(excess, _X_LO, x_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        return h * h * -((x / radius) ** 2)
    if edge == gamma:
        return 0.0 if w_max > 0 else None
    if w_max <= 0:
        return None
    y_max = math.sqrt(w_max) * radius

    def deficit(y):
        return bessel_j_logderiv(m, y) / radius - gamma

    if deficit(y_max) >= 0:
        return None
    y = brentq(deficit, _X_LO, y_max, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return h * h * (y / radius) ** 2


def disk_mode_eig(h: float, m: int, radius: float = 1.0, w_max: float = 0.0) -> float | None:
    """
    Eigenvalue λ = h²w of mode m on the disk, or None when the mode has none with w < w_max.

    A negative eigenvalue exists exactly when m/radius < h^{−1/2}. w_max in (0, j_{0,1}²/r²)
    opens the oscillatory branch.
    """
    if m < 0 or int(m) != m:
        raise InvalidParameterError(f"angular mode must be a non-negative integer, got {m}")
    if not 0 < h < 1:
        raise InvalidParameterError(f"h must lie in (0, 1), got {h}")
    if w_max >= (J01 / radius) ** 2:
        raise InvalidParameterError(
            f"w_max = {w_max} reaches the first Dirichlet eigenvalue {(J01 / radius) ** 2}"
        )
    key = (h, int(m), radius, w_max)
    cached = _disk_mode_cache.get(key, default=False)
    if cached is not False:
        return cached
    value = _solve_disk_mode(h, int(m), radius, w_max)
    _disk_mode_cache.set(key, value)
    return value


def disk_spectrum(prob: RobinProblem) -> SpectrumResult:
    """All eigenvalues of the disk below the window, modes m ≥ 1 counted twice."""
    domain = prob.domain
    if domain.kind != "disk":
        raise InvalidParameterError(f"disk_spectrum needs a disk, got {domain.kind}")
    radius, h = domain.radius, prob.h
    limit = int(10 * radius * h**-0.5) + 100
    entries = []
    m = 0
    while True:
        lam = disk_mode_eig(h, m, radius, w_max=prob.epsilon)
        if lam is None:
            break
        entries.extend([(lam, m)] * (1 if m == 0 else 2))
        m += 1
        if m > limit:
            raise ResolutionError(f"disk mode enumeration did not terminate by m={limit}")
    entries.sort(key=lambda e: (e[0], e[1]))
    logger.debug("disk spectrum h=%g: %d eigenvalues, modes 0..%d", h, len(entries), m - 1)
    return SpectrumResult(
        h=h,
        eigenvalues=np.array([e[0] for e in entries]),
        tags=tuple(EigenTag(mode=e[1], method="bessel-exact") for e in entries),
        window=prob.window,
        boundary_length=domain.boundary_length,
        problem=prob.model_dump(mode="json"),
        payloads=tuple(("bessel", e[1], e[0] / h**2, radius) for e in entries),
    )


# ============================================================================
# Annulus
# ============================================================================


def _logderiv_array(func, m: int, x: np.ndarray) -> np.ndarray:
    return np.array([func(m, float(v)) for v in x])


def _annulus_determinant(m: int, k: np.ndarray, h: float, r0: float) -> np.ndarray:
    """
    Boundary determinant of A I_m(kr) + B K_m(kr) divided by I_m(k)K_m(kr0).

    Robin holds at r = 1 (outward +∂_r) and at r = r0 (outward −∂_r). Non-finite samples are
    returned as nan and skipped by the scan.
    """
    gamma = h**-0.5
    k = np.atleast_1d(np.asarray(k, dtype=float))
    with np.errstate(all="ignore"):
        outer_i = _logderiv_array(bessel_i_logderiv, m, k) - gamma
        outer_k = _logderiv_array(bessel_k_logderiv, m, k) - gamma
        inner_k = -_logderiv_array(bessel_k_logderiv, m, k * r0) / r0 - gamma
        inner_i = -_logderiv_array(bessel_i_logderiv, m, k * r0) / r0 - gamma
        rho = (
            kve(m, k) * ive(m, k * r0) / (ive(m, k) * kve(m, k * r0))
        ) * np.exp(-2 * k * (1 - r0))
        coupling = np.where(rho == 0, 0.0, rho * outer_k * inner_i)
        det = outer_i * inner_k - coupling
    return np.where(np.isfinite(det), det, np.nan)


def _annulus_mode_roots(m: int, h: float, r0: float, step: float) -> list[float]:
    ks = np.arange(SCAN_START, 2 * h**-0.5 + step, step)
    values = _annulus_determinant(m, ks, h, r0)
    roots = []
    for i in range(len(ks) - 1):
        a, b = values[i], values[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0:
            roots.append(float(ks[i]))
            continue
        if a * b < 0:
            roots.append(
                brentq(
                    lambda k: float(_annulus_determinant(m, np.array([k]), h, r0)[0]),
                    ks[i],
                    ks[i + 1],
                    xtol=1e-14,
                    rtol=4 * np.finfo(float).eps,
                )
            )
    return roots


def annulus_spectrum(prob: RobinProblem, scan_step: float = SCAN_STEP) -> SpectrumResult:
    """
    Negative eigenvalues of {r0 < |x| < 1} with Robin on both circles.

    Each mode's roots are located by a sign scan of the boundary determinant in k = √(−w)
    and checked against the exact DtN count of the mode; a finer rescan is tried once before
    a mismatch is reported.
    """
    domain = prob.domain
    if domain.kind != "annulus" or domain.inner_radius is None:
        raise InvalidParameterError("annulus_spectrum needs an annulus with an inner radius")
    if domain.radius != 1.0:
        raise InvalidParameterError("annulus_spectrum expects the outer radius 1")
    h, r0 = prob.h, domain.inner_radius
    entries = []
    m = 0
    while (expected := annulus_dtn_count(h, r0, m)) > 0:
        roots = _annulus_mode_roots(m, h, r0, scan_step)
        if len(roots) != expected:
            logger.info("annulus mode %d: %d roots, expected %d; rescanning", m, len(roots), expected)
            roots = _annulus_mode_roots(m, h, r0, scan_step / 4)
        if len(roots) != expected:
            raise ResolutionError(
                f"annulus mode {m}: found {len(roots)} roots, DtN count is {expected}"
            )
        copies = 1 if m == 0 else 2
        for k in roots:
            entries.extend([(-(h * k) ** 2, m)] * copies)
        m += 1
    entries.sort(key=lambda e: (e[0], e[1]))
    return SpectrumResult(
        h=h,
        eigenvalues=np.array([e[0] for e in entries]),
        tags=tuple(EigenTag(mode=e[1], method="bessel-exact") for e in entries),
        window=min(prob.window, 0.0),
        boundary_length=domain.boundary_length,
        problem=prob.model_dump(mode="json"),
    )


# ============================================================================
# Collar
# ============================================================================


class _Elements(NamedTuple):
    nodes: np.ndarray
    delta: float
    points: np.ndarray
    weights: np.ndarray
    phi: np.ndarray


def _elements(depth: float, n_elements: int) -> _Elements:
    nodes = np.linspace(0.0, depth, n_elements + 1)
    delta = depth / n_elements
    points = nodes[:-1, None] + (1 + _GAUSS_POINTS[None, :]) * delta / 2
    weights = np.broadcast_to(_GAUSS_WEIGHTS * delta / 2, points.shape)
    phi = np.stack([(1 - _GAUSS_POINTS) / 2, (1 + _GAUSS_POINTS) / 2])
    return _Elements(nodes, delta, points, weights, phi)


def _local_integrals(el: _Elements):
    """S0, S1, M0, M1 per element as arrays of shape (n_elements, 2, 2)."""
    dphi = np.array([-1.0, 1.0]) / el.delta
    grad = np.multiply.outer(dphi, dphi)
    value = np.einsum("aq,bq->abq", el.phi, el.phi)
    wsum = el.weights.sum(axis=1)
    wt = (el.weights * el.points).sum(axis=1)
    s0 = wsum[:, None, None] * grad
    s1 = wt[:, None, None] * grad
    m0 = np.einsum("eq,abq->eab", el.weights, value)
    m1 = np.einsum("eq,abq->eab", el.weights * el.points, value)
    return s0, s1, m0, m1, value


def _check_collar(curve: Curve, h: float, disc: CollarDiscretization) -> float:
    depth = disc.collar_depth(h)
    reach = depth * curve.max_abs_curvature
    if reach > disc.max_depth_curvature:
        raise CollarTooDeepError(
            f"collar depth {depth:.4g} times max|κ| = {reach:.3g} exceeds"
            f" {disc.max_depth_curvature}"
        )
    unknowns = disc.n_modes * disc.n_elements * (2 if disc.richardson else 1)
    if unknowns > MAX_COLLAR_UNKNOWNS:
        raise ResolutionError(
            f"collar problem with {unknowns} unknowns exceeds the cap {MAX_COLLAR_UNKNOWNS}"
        )
    return depth


def _drop_inner(matrix: np.ndarray, inner_bc: BoundaryCondition) -> np.ndarray:
    if inner_bc == BoundaryCondition.DIRICHLET:
        return matrix[:-1, :-1]
    return matrix


def _per_mode_matrices(
    kappa: float, h: float, wavenumber: float, el: _Elements, inner_bc: BoundaryCondition
) -> tuple[np.ndarray, np.ndarray]:
    """Dense tridiagonal stiffness and mass of one Fourier mode on a constant-κ collar."""
    s0, s1, m0, m1, value = _local_integrals(el)
    inv_a = 1.0 / (1.0 - kappa * el.points)
    angular = np.einsum("eq,abq->eab", el.weights * inv_a, value)
    local_k = h * h * (s0 - kappa * s1 + wavenumber**2 * angular)
    local_m = m0 - kappa * m1
    n = el.nodes.size
    stiffness = np.zeros((n, n))
    mass = np.zeros((n, n))
    for a in range(2):
        for b in range(2):
            idx = np.arange(n - 1)
            np.add.at(stiffness, (idx + a, idx + b), local_k[:, a, b])
            np.add.at(mass, (idx + a, idx + b), local_m[:, a, b])
    stiffness[0, 0] -= h**1.5
    return _drop_inner(stiffness, inner_bc), _drop_inner(mass, inner_bc)


def _per_mode_solve(
    curve: Curve,
    h: float,
    depth: float,
    n_elements: int,
    inner_bc: BoundaryCondition,
    wavenumber: float,
    window: float,
    count: int | None,
):
    el = _elements(depth, n_elements)
    stiffness, mass = _per_mode_matrices(
        float(curve.kappa_samples[0]), h, wavenumber, el, inner_bc
    )
    try:
        if count is None:
            vals, vecs = eigh(stiffness, mass, subset_by_value=(-np.inf, window))
        elif count == 0:
            return np.array([]), np.zeros((stiffness.shape[0], 0))
        else:
            vals, vecs = eigh(stiffness, mass, subset_by_index=[0, count - 1])
    except LinAlgError as e:
        raise ConvergenceError(f"collar mode solve failed: {e}") from e
    return vals, vecs


def _constant_curvature_collar(
    curve: Curve, h: float, disc: CollarDiscretization, depth: float, window: float
):
    """Independent per-mode solves on a circle; returns (values, errors, tags, payloads)."""
    half = disc.n_modes // 2
    entries = []
    for k in range(half + 1):
        wavenumber = math.pi * k / curve.half_perimeter
        fine, vecs = _per_mode_solve(
            curve, h, depth, 2 * disc.n_elements if disc.richardson else disc.n_elements,
            disc.inner_bc, wavenumber, window, None,
        )
        if fine.size == 0:
            break
        if k == half:
            raise ResolutionError(
                f"Fourier mode |k| = {half} still has eigenvalues below the window;"
                " raise n_modes"
            )
        if disc.richardson:
            coarse, _ = _per_mode_solve(
                curve, h, depth, disc.n_elements, disc.inner_bc, wavenumber, window, fine.size
            )
            values = (4 * fine - coarse) / 3
            errors = np.abs(fine - coarse) / 3
        else:
            values, errors = fine, np.zeros_like(fine)
        for i, value in enumerate(values):
            vec = vecs[:, i]
            if disc.inner_bc == BoundaryCondition.DIRICHLET:
                vec = np.append(vec, 0.0)
            for signed in ([k] if k == 0 else [k, -k]):
                entries.append(
                    (value, signed, errors[i], ("collar", np.array([signed]), vec[:, None]))
                )
    return entries


def _generic_blocks(
    curve: Curve, h: float, depth: float, n_elements: int, ks: np.ndarray
):
    """Dense s-blocks of stiffness and mass on the t-tridiagonal pattern."""
    el = _elements(depth, n_elements)
    s0, s1, m0, m1, value = _local_integrals(el)
    kappa_hat = curve.kappa_hat(ks[:, None] - ks[None, :])
    real = np.max(np.abs(curve.kappa_coeffs.imag)) < 1e-14 * np.max(np.abs(curve.kappa_coeffs))
    if real:
        kappa_hat = kappa_hat.real
    dtype = float if real else complex
    wave = math.pi * ks / curve.half_perimeter
    lags = np.arange(ks.size)
    n_nodes = el.nodes.size
    size = ks.size
    stiff = {}
    mass = {}
    identity = np.eye(size)

    def add(store, key, block):
        if key in store:
            store[key] += block
        else:
            store[key] = block.astype(dtype, copy=True)

    for e in range(n_elements):
        inv_a = 1.0 / (1.0 - np.multiply.outer(el.points[e], curve.kappa_samples))
        coeffs = fourier_coefficients(inv_a)
        angular = np.zeros((2, 2, size, size), dtype=dtype)
        for q in range(el.points.shape[1]):
            column = coeffs[q, lags]
            row = coeffs[q, (-lags) % coeffs.shape[1]]
            b_matrix = toeplitz(column, row)
            if real:
                b_matrix = b_matrix.real
            weighted = (wave[:, None] * b_matrix * wave[None, :]) * el.weights[e, q]
            for a in range(2):
                for b in range(2):
                    angular[a, b] += el.phi[a, q] * el.phi[b, q] * weighted
        for a in range(2):
            for b in range(2):
                key = (e + a, e + b)
                block_k = h * h * (s0[e, a, b] * identity - s1[e, a, b] * kappa_hat + angular[a, b])
                block_m = m0[e, a, b] * identity - m1[e, a, b] * kappa_hat
                add(stiff, key, block_k)
                add(mass, key, block_m)
    stiff[(0, 0)] = stiff[(0, 0)] - h**1.5 * identity
    return stiff, mass, n_nodes


def _to_sparse(blocks: dict, n_nodes: int) -> sparse.csc_matrix:
    grid = [[None] * n_nodes for _ in range(n_nodes)]
    for (i, j), block in blocks.items():
        if i < n_nodes and j < n_nodes:
            grid[i][j] = sparse.csr_matrix(block)
    return sparse.bmat(grid, format="csc")


def _generic_solve(
    curve: Curve,
    h: float,
    depth: float,
    n_elements: int,
    inner_bc: BoundaryCondition,
    ks: np.ndarray,
    window: float,
    count: int | None,
):
    stiff, mass, n_nodes = _generic_blocks(curve, h, depth, n_elements, ks)
    kept = n_nodes - 1 if inner_bc == BoundaryCondition.DIRICHLET else n_nodes
    a_mat, m_mat = _to_sparse(stiff, kept), _to_sparse(mass, kept)
    size = a_mat.shape[0]
    if size <= DENSE_LIMIT:
        try:
            if count is None:
                vals, vecs = eigh(a_mat.toarray(), m_mat.toarray(), subset_by_value=(-np.inf, window))
            else:
                vals, vecs = eigh(a_mat.toarray(), m_mat.toarray(), subset_by_index=[0, count - 1])
        except LinAlgError as e:
            raise ConvergenceError(f"collar eigensolver failed: {e}") from e
        return vals, vecs

    shift = -h * (1 + 3 * math.sqrt(h) * max(curve.max_abs_curvature, 1.0))
    lu = splu((a_mat - shift * m_mat).tocsc(), permc_spec="NATURAL")
    op_inv = LinearOperator(a_mat.shape, matvec=lu.solve, dtype=a_mat.dtype)
    guess = count or int(1.2 * curve.perimeter / math.pi * h**-0.5) + 6
    n_eigs = min(guess, size - 2)
    while True:
        try:
            vals, vecs = eigsh(
                a_mat, k=n_eigs, M=m_mat, sigma=shift, OPinv=op_inv, which="LM",
                v0=np.ones(size, dtype=a_mat.dtype),
            )
        except (ArpackNoConvergence, ArpackError) as e:
            raise ConvergenceError(f"collar eigensolver failed: {e}") from e
        order = np.argsort(vals.real)
        vals, vecs = vals.real[order], vecs[:, order]
        if count is not None or vals[-1] >= window:
            break
        if n_eigs >= size - 2:
            raise ResolutionError("collar window is not resolved by the discretization")
        n_eigs = min(2 * n_eigs, size - 2)
    if count is None:
        below = vals < window
        vals, vecs = vals[below], vecs[:, below]
    return vals, vecs


def _general_collar(
    curve: Curve, h: float, disc: CollarDiscretization, depth: float, window: float
):
    half = disc.n_modes // 2
    ks = np.arange(-half, half + 1)
    fine_elements = 2 * disc.n_elements if disc.richardson else disc.n_elements
    fine, vecs = _generic_solve(curve, h, depth, fine_elements, disc.inner_bc, ks, window, None)
    if disc.richardson and fine.size:
        coarse, _ = _generic_solve(
            curve, h, depth, disc.n_elements, disc.inner_bc, ks, window, fine.size
        )
        values = (4 * fine - coarse) / 3
        errors = np.abs(fine - coarse) / 3
    else:
        values, errors = fine, np.zeros_like(fine)
    entries = []
    n_t = vecs.shape[0] // ks.size
    for i, value in enumerate(values):
        coeffs = vecs[:, i].reshape(n_t, ks.size)
        if disc.inner_bc == BoundaryCondition.DIRICHLET:
            coeffs = np.vstack([coeffs, np.zeros((1, ks.size), dtype=coeffs.dtype)])
        energy = np.sum(np.abs(coeffs) ** 2, axis=0)
        edge = max(energy[0], energy[-1]) / energy.sum()
        if edge > 1e-8:
            logger.warning("collar mode %d has %.2g of its weight at |k| = %d", i, edge, half)
        dominant = int(ks[int(np.argmax(energy))])
        entries.append((value, dominant, errors[i], ("collar", ks, coeffs)))
    return entries


def collar_spectrum(
    curve: Curve,
    prob: RobinProblem,
    disc: CollarDiscretization,
    component: str = "outer",
) -> SpectrumResult:
    """
    Collar eigenvalues below the window for the boundary curve of a domain.

    Constant-curvature curves decouple into independent Fourier modes; other curves are
    assembled in t-major order with dense s-blocks and solved by shift-invert. Values are
    extrapolated from Nt and 2Nt elements when disc.richardson is set.
    """
    h = prob.h
    depth = _check_collar(curve, h, disc)
    window = prob.window
    if curve.kind == "circle":
        entries = _constant_curvature_collar(curve, h, disc, depth, window)
    else:
        entries = _general_collar(curve, h, disc, depth, window)
    entries.sort(key=lambda e: (e[0], e[1]))
    payloads = tuple(
        payload + (depth, curve) for _, _, _, payload in entries
    )
    logger.debug(
        "collar spectrum h=%g %s δ=%.4g: %d eigenvalues", h, disc.inner_bc.value, depth, len(entries)
    )
    return SpectrumResult(
        h=h,
        eigenvalues=np.array([e[0] for e in entries]),
        tags=tuple(
            EigenTag(
                mode=e[1],
                method="collar",
                inner_bc=disc.inner_bc.value,
                error=float(e[2]),
                component=component,
            )
            for e in entries
        ),
        window=window,
        boundary_length=curve.perimeter,
        problem=prob.model_dump(mode="json"),
        discretization=disc.model_dump(mode="json") | {"depth": depth},
        payloads=payloads,
    )


def annulus_collar_spectrum(prob: RobinProblem, disc: CollarDiscretization) -> SpectrumResult:
    """Direct sum of the outer-circle collar and the hole collar of an annulus."""
    domain = prob.domain
    if domain.kind != "annulus" or domain.inner_radius is None:
        raise InvalidParameterError("annulus_collar_spectrum needs an annulus")
    r0 = domain.inner_radius
    depth = disc.collar_depth(prob.h)
    if 2 * depth >= domain.radius - r0:
        raise CollarTooDeepError(
            f"collars of depth {depth:.4g} overlap inside the annulus ({r0}, {domain.radius})"
        )
    outer = collar_spectrum(make_circle(domain.radius), prob, disc, "outer")
    inner = collar_spectrum(make_circle(r0, hole=True), prob, disc, "inner")
    order = np.argsort(np.concatenate([outer.eigenvalues, inner.eigenvalues]), kind="stable")
    values = np.concatenate([outer.eigenvalues, inner.eigenvalues])[order]
    tags = (outer.tags + inner.tags)
    payloads = (outer.payloads + inner.payloads)
    return SpectrumResult(
        h=prob.h,
        eigenvalues=values,
        tags=tuple(tags[i] for i in order),
        window=prob.window,
        boundary_length=domain.boundary_length,
        problem=prob.model_dump(mode="json"),
        discretization=outer.discretization,
        payloads=tuple(payloads[i] for i in order),
    )


# ============================================================================
# Mode profiles
# ============================================================================


def _bessel_profile(lam: float, h: float, m: int, w: float, radius: float, n_r: int | None):
    k = math.sqrt(-w)
    if n_r is None:
        n_r = int(min(200001, max(4001, 40 * radius / math.sqrt(h) + 1)))
    t = np.linspace(0.0, radius, n_r)
    r = radius - t
    scale = 1.0 / (ive(m, k * radius) * math.sqrt(2 * math.pi * radius))
    decay = np.exp(k * (r - radius))
    f = ive(m, k * r) * decay * scale
    df = 0.5 * k * (ive(m - 1, k * r) + ive(m + 1, k * r)) * decay * scale
    angular = np.zeros_like(f)
    np.divide(m * f, r, out=angular, where=r > 0)
    if m == 1:
        angular[r == 0] = df[r == 0]
    return EigenMode(
        eigenvalue=lam,
        w=w,
        h=h,
        mode=m,
        method="bessel-exact",
        region="global",
        s=np.zeros(1),
        t=t,
        modulus=np.abs(f)[None, :],
        grad_sq=(df**2 + angular**2)[None, :],
        jacobian=r[None, :],
        ds=2 * math.pi,
        boundary_norm=float(2 * math.pi * radius * f[0] ** 2),
    )


def _collar_profile(lam: float, h: float, tag: EigenTag, payload, n_s: int | None):
    _, ks, coeffs, depth, curve = payload
    n_t = coeffs.shape[0]
    t = np.linspace(0.0, depth, n_t)
    if n_s is None:
        n_s = max(64, 4 * int(np.max(np.abs(ks))) + 8)
    s = curve.perimeter * np.arange(n_s) / n_s
    basis = np.exp(1j * math.pi * np.multiply.outer(s, ks) / curve.half_perimeter)
    basis /= math.sqrt(curve.perimeter)
    psi = basis @ coeffs.T
    dpsi_s = basis @ (coeffs * (1j * math.pi * ks / curve.half_perimeter)).T
    dpsi_t = np.gradient(psi, t, axis=1)
    ds = curve.perimeter / n_s
    anchor = int(np.argmax(np.abs(psi[:, 0])))
    phase = np.conj(psi[anchor, 0]) / abs(psi[anchor, 0])
    norm = math.sqrt(ds * np.sum(np.abs(psi[:, 0]) ** 2))
    factor = phase / norm
    psi, dpsi_s, dpsi_t = psi * factor, dpsi_s * factor, dpsi_t * factor
    a = 1.0 - np.multiply.outer(curve.curvature(s), t)
    return EigenMode(
        eigenvalue=lam,
        w=lam / h**2,
        h=h,
        mode=tag.mode,
        method="collar",
        region="collar",
        s=s,
        t=t,
        modulus=np.abs(psi),
        grad_sq=np.abs(dpsi_t) ** 2 + np.abs(dpsi_s) ** 2 / a**2,
        jacobian=a,
        ds=ds,
        boundary_norm=float(ds * np.sum(np.abs(psi[:, 0]) ** 2)),
    )


def mode_profile(
    result: SpectrumResult, index: int, n_r: int | None = None, n_s: int | None = None
) -> EigenMode:
    """
    Eigenfunction of result.eigenvalues[index] on its grid, normalized to ‖u‖_{L²(Γ)} = 1.

    Exact disk modes are the radial profiles I_m(√(−w)r)/I_m(√(−w)R); collar modes are
    resampled on a uniform (s, t) grid with the phase chosen so that the largest boundary
    value is real and positive.
    """
    if not 0 <= index < len(result.eigenvalues) or index >= len(result.payloads):
        raise InvalidParameterError(f"mode index {index} is out of range")
    lam = float(result.eigenvalues[index])
    payload = result.payloads[index]
    if payload[0] == "bessel":
        _, m, w, radius = payload
        if w >= 0:
            raise InvalidParameterError("radial profiles are available for negative modes only")
        return _bessel_profile(lam, result.h, m, w, radius, n_r)
    return _collar_profile(lam, result.h, result.tags[index], payload, n_s)
