"""
Experiments on the unit disk, where every Robin eigenvalue is known per angular mode: the
h^{3/2} expansion, collar bracketing, Weyl counting, the Robin to Steklov correspondence and
the pairing of Steklov eigenvalues.
"""

import logging
import math
from functools import partial
from typing import Annotated

import numpy as np
from pydantic import BaseModel, Field

from src.effective_op import EffectiveOperator, eigs
from src.experiments.registry import register
from src.experiments.runner import ExperimentContext
from src.fitting import MIN_FIT_SAMPLES, fit_order, spread
from src.geometry import make_circle, make_ellipse
from src.robin2d import SpectrumResult, collar_spectrum, disk_mode_eig, disk_spectrum
from src.service.models import (
    BoundaryCondition,
    CollarDiscretization,
    Criterion,
    DomainSpec,
    HGrid,
    RobinProblem,
)
from src.steklov import (
    disk_dtn_spectrum,
    dtn_disk_eig,
    robin_to_steklov,
    rozenblum_check,
    weyl_count,
)

logger = logging.getLogger(__name__)

_DYADIC = [2.0**-j for j in range(6, 15)]
_UNIT_DISK = DomainSpec(kind="disk", radius=1.0)


def _disk_result(h: float) -> SpectrumResult:
    return disk_spectrum(RobinProblem(h=h, domain=_UNIT_DISK))


def _spectrum_rows(result: SpectrumResult, label: str) -> list[dict]:
    disc = result.discretization or {}
    return [
        {
            "domain_id": label,
            "h": result.h,
            "n": n,
            "m_or_k": tag.mode,
            "lambda": float(lam),
            "method": tag.method,
            "inner_bc": tag.inner_bc or "",
            "Ns": disc.get("n_modes", ""),
            "Nt": disc.get("n_elements", ""),
            "err_est": "" if tag.error is None else tag.error,
        }
        for n, (lam, tag) in enumerate(zip(result.eigenvalues, result.tags), start=1)
    ]


# ============================================================================
# Expansion and bracketing
# ============================================================================


class DiskTheoremParameters(BaseModel):
    h_values: HGrid = _DYADIC
    mode_fraction: Annotated[float, Field(gt=0, lt=1)] = 0.9
    spread_max: Annotated[float, Field(ge=1)] = 3.0
    bracketing_h: HGrid = [1e-2, 4e-3]
    bracketing_eigs: Annotated[int, Field(ge=1)] = 10
    n_modes: Annotated[int, Field(ge=4)] = 32
    n_elements: Annotated[int, Field(ge=4)] = 400
    depth_factor: Annotated[
        float, Field(gt=0, description="Collar depth in units of √h")
    ] = 8.0
    max_depth_curvature: Annotated[float, Field(gt=0, lt=1)] = 0.85
    gap_factor: Annotated[
        float, Field(gt=0, description="Allowed collar-exact gap in units of h")
    ] = 1e-5


def _expansion_constant(h: float, mode_fraction: float) -> dict:
    result = _disk_result(h)
    k_max = mode_fraction * h**-0.5
    ratios = [
        abs(lam + h - h * h * tag.mode**2) / (h**1.5 * (1 + h**0.75 * tag.mode**2))
        for lam, tag in zip(result.eigenvalues, result.tags)
        if tag.mode <= k_max
    ]
    return {"h": h, "modes": int(k_max) + 1, "C_h": max(ratios)}


def _bracketing_point(h: float, params: DiskTheoremParameters) -> dict:
    prob = RobinProblem(h=h, domain=_UNIT_DISK)
    exact = _disk_result(h).eigenvalues[: params.bracketing_eigs]
    circle = make_circle(1.0)
    bounds = {}
    for bc in (BoundaryCondition.DIRICHLET, BoundaryCondition.NEUMANN):
        disc = CollarDiscretization(
            n_modes=params.n_modes,
            n_elements=params.n_elements,
            inner_bc=bc,
            depth=params.depth_factor * math.sqrt(h),
            max_depth_curvature=params.max_depth_curvature,
        )
        bounds[bc] = collar_spectrum(circle, prob, disc)
    upper, lower = bounds[BoundaryCondition.DIRICHLET], bounds[BoundaryCondition.NEUMANN]
    logger.info(
        "bracketing h=%g: %d Dirichlet, %d Neumann collar eigenvalues",
        h, upper.eigenvalues.size, lower.eigenvalues.size,
    )
    n = min(len(exact), len(upper.eigenvalues), len(lower.eigenvalues))
    violations = 0
    gap = 0.0
    for i in range(n):
        slack_u = (upper.tags[i].error or 0.0) + 1e-14
        slack_l = (lower.tags[i].error or 0.0) + 1e-14
        violations += exact[i] > upper.eigenvalues[i] + slack_u
        violations += lower.eigenvalues[i] > exact[i] + slack_l
        gap = max(gap, abs(upper.eigenvalues[i] - exact[i]), abs(lower.eigenvalues[i] - exact[i]))
    return {
        "h": h,
        "compared": n,
        "missing": params.bracketing_eigs - n,
        "violations": int(violations),
        "gap_over_h": gap / h,
        "rows": _spectrum_rows(upper, "disk") + _spectrum_rows(lower, "disk"),
    }


@register("disk-theorem-main", DiskTheoremParameters)
def run_disk_theorem(params: DiskTheoremParameters, context: ExperimentContext) -> list[Criterion]:
    """Disk eigenvalues against −h + h²k² and collar bracketing of the lowest ones."""
    constants = [
        r
        for r in context.grid_map(
            partial(_expansion_constant, mode_fraction=params.mode_fraction),
            params.h_values,
            "h",
        )
        if r is not None
    ]
    context.write_rows("expansion_constants", constants)
    criteria = []
    if constants:
        criteria.append(
            Criterion.build("expansion_constant_spread", spread([r["C_h"] for r in constants]), params.spread_max, 0.0, "le")
        )
        criteria.append(
            Criterion.build("expansion_constant_max", max(r["C_h"] for r in constants), 0.0, 0.0, "ge", asserted=False)
        )

    brackets = [
        r
        for r in context.grid_map(
            partial(_bracketing_point, params=params), params.bracketing_h, "bracketing h"
        )
        if r is not None
    ]
    context.write_rows("bracketing_spectra", [row for r in brackets for row in r["rows"]])
    context.write_rows(
        "bracketing", [{k: v for k, v in r.items() if k != "rows"} for r in brackets]
    )
    if brackets:
        criteria.append(
            Criterion.build("bracketing_violations", sum(r["violations"] for r in brackets), 0.0, 0.0, "le")
        )
        criteria.append(
            Criterion.build("bracketing_missing", sum(r["missing"] for r in brackets), 0.0, 0.0, "le")
        )
        criteria.append(
            Criterion.build("collar_gap_over_h", max(r["gap_over_h"] for r in brackets), params.gap_factor, 0.0, "le")
        )
    return criteria


# ============================================================================
# Weyl law
# ============================================================================


class WeylParameters(BaseModel):
    h_values: HGrid = _DYADIC
    count_tol: Annotated[float, Field(ge=0)] = 3.0
    slope_target: float = -0.5
    slope_tol: Annotated[float, Field(ge=0)] = 0.05
    threshold_factor: Annotated[
        float, Field(gt=-1, lt=0, description="λ of the threshold λh")
    ] = -0.75
    shifted_constant: Annotated[
        float, Field(gt=0, description="Bound on |N − prediction|·h^{1/4} at λh")
    ] = 3.0


def _weyl_point(h: float, threshold_factor: float) -> dict:
    result = _disk_result(h)
    at_zero = weyl_count(result, 0.0)
    shifted = weyl_count(result, threshold_factor * h)
    gamma = h**-0.5
    dtn_count = 1 + 2 * sum(1 for m in range(1, math.ceil(gamma) + 1) if m < gamma)
    return {
        "h": h,
        "count": at_zero.count,
        "prediction": at_zero.prediction,
        "deviation": at_zero.deviation,
        "dtn_count": dtn_count,
        "shifted_count": shifted.count,
        "shifted_prediction": shifted.prediction,
        "shifted_scaled_deviation": abs(shifted.deviation) * h**0.25,
    }


@register("weyl", WeylParameters)
def run_weyl(params: WeylParameters, context: ExperimentContext) -> list[Criterion]:
    """Counting function of the disk against (|Γ|/π)√(1+λ)h^{−1/2}."""
    rows = [
        r
        for r in context.grid_map(
            partial(_weyl_point, threshold_factor=params.threshold_factor), params.h_values, "h"
        )
        if r is not None
    ]
    context.write_rows("weyl", rows)
    if not rows:
        return []
    criteria = [
        Criterion.build("count_deviation_max", max(abs(r["deviation"]) for r in rows), 0.0, params.count_tol, "le"),
        Criterion.build(
            "dtn_count_mismatches", sum(r["count"] != r["dtn_count"] for r in rows), 0.0, 0.0, "le"
        ),
        Criterion.build(
            "shifted_constant",
            max(r["shifted_scaled_deviation"] for r in rows),
            params.shifted_constant,
            0.0,
            "le",
        ),
    ]
    if len(rows) >= MIN_FIT_SAMPLES:
        fit = fit_order([r["h"] for r in rows], [r["count"] for r in rows], params.slope_target, params.slope_tol)
        criteria.append(Criterion.build("count_slope", fit.slope, params.slope_target, params.slope_tol, "abs_le"))
    return criteria


# ============================================================================
# Robin to Steklov
# ============================================================================


class SteklovParameters(BaseModel):
    h: Annotated[float, Field(gt=0, lt=1)] = 1e-4
    window_coefficient: Annotated[
        float, Field(gt=0, description="Lowest mode a·h^{−1/4} of the asserted window")
    ] = 4.0
    mode_fraction: Annotated[float, Field(gt=0, lt=1)] = 0.9
    relative_tol: Annotated[float, Field(gt=0)] = 0.05
    consistency_tol: Annotated[float, Field(gt=0)] = 1e-10


@register("steklov-correspondence", SteklovParameters)
def run_steklov(params: SteklovParameters, context: ExperimentContext) -> list[Criterion]:
    """h^{−1}√(h + λ_m) against the harmonic Steklov eigenvalue m, mode by mode."""
    h = params.h
    gamma = h**-0.5
    lo, hi = params.window_coefficient * h**-0.25, params.mode_fraction * gamma
    rows = []
    m = 0
    while (lam := disk_mode_eig(h, m)) is not None:
        w = lam / h**2
        mu = robin_to_steklov(h, lam)
        rows.append(
            {
                "h": h,
                "m": m,
                "lambda": lam,
                "mu": mu,
                "relative_error": abs(mu - m) / m if m else math.nan,
                "consistency": abs(dtn_disk_eig(w, m) - gamma) / gamma,
                "in_window": lo <= m <= hi,
                "method": "bessel-exact",
            }
        )
        m += 1
    context.write_rows("steklov_correspondence", rows)
    window = [r for r in rows if r["in_window"]]
    mus = [r["mu"] for r in rows]
    return [
        Criterion.build(
            "window_relative_error_max",
            max(r["relative_error"] for r in window) if window else None,
            params.relative_tol,
            0.0,
            "le",
        ),
        Criterion.build(
            "dtn_consistency_max", max(r["consistency"] for r in rows), params.consistency_tol, 0.0, "le"
        ),
        Criterion.build(
            "steklov_monotonicity_violations", int(np.sum(np.diff(mus) <= 0)), 0.0, 0.0, "le"
        ),
        Criterion.build(
            "outside_window_relative_error_max",
            max((r["relative_error"] for r in rows if r["m"] and not r["in_window"]), default=None),
            params.relative_tol,
            0.0,
            "le",
            asserted=False,
        ),
    ]


# ============================================================================
# Rozenblum pairing
# ============================================================================


class RozenblumParameters(BaseModel):
    k_max: Annotated[int, Field(ge=1)] = 50
    tol: Annotated[float, Field(ge=0)] = 1e-12
    ellipse_a: Annotated[float, Field(gt=0)] = 2.0
    ellipse_b: Annotated[float, Field(gt=0)] = 1.0
    ellipse_h: Annotated[float, Field(gt=0, lt=1)] = 1e-3
    truncation: Annotated[int, Field(ge=8)] = 64
    n_eigs: Annotated[int, Field(ge=8)] = 60


def _effective_steklov(params: RozenblumParameters) -> tuple[np.ndarray, int, float]:
    """Steklov values of the ellipse from the effective operator, invalid ones as 0."""
    curve = make_ellipse(params.ellipse_a, params.ellipse_b)
    h = params.ellipse_h
    values = eigs(EffectiveOperator(curve, h, 0.0, params.truncation), params.n_eigs)
    mu = np.array([robin_to_steklov(h, -h + h**1.5 * v) if v >= 0 else 0.0 for v in values])
    first = int(np.argmax(values >= 0)) + 1
    return mu, max(1, (first + 1) // 2), curve.half_perimeter


@register("rozenblum", RozenblumParameters)
def run_rozenblum(params: RozenblumParameters, context: ExperimentContext) -> list[Criterion]:
    """Pairing μ_{2k} ≈ μ_{2k+1} ≈ πk/L of Steklov eigenvalues."""
    disk = disk_dtn_spectrum(0.0, params.k_max)
    report = rozenblum_check(math.pi, disk.mu, 1, params.k_max)
    context.write_rows(
        "disk_steklov",
        [{"domain_id": "disk", "w_or_h": 0.0, "m": m, "mu": mu, "method": disk.method}
         for m, mu in zip(disk.modes, disk.mu)],
    )
    criteria = [
        Criterion.build("disk_pair_gap_max", report.max_pair_gap, 0.0, params.tol, "le"),
        Criterion.build("disk_mode_deviation_max", report.max_mode_deviation, 0.0, params.tol, "le"),
    ]

    mu, k_min, half_perimeter = _effective_steklov(params)
    ellipse = rozenblum_check(half_perimeter, mu, k_min)
    context.write_rows(
        "ellipse_steklov",
        [{"domain_id": "ellipse", "w_or_h": params.ellipse_h, "k": int(k), "pair_gap": float(g),
          "mode_deviation": float(d), "method": "asymptotic"}
         for k, g, d in zip(ellipse.ks, ellipse.pair_gaps, ellipse.mode_deviation)],
    )
    criteria.append(
        Criterion.build("ellipse_pair_gap_max", ellipse.max_pair_gap, 0.0, 0.0, "le", asserted=False)
    )
    criteria.append(
        Criterion.build(
            "ellipse_pair_gap_slope", ellipse.fit.slope if ellipse.fit else None, -6.0, 0.0, "le",
            asserted=False,
        )
    )
    return criteria
