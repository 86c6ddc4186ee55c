"""
Quasimode order, first-eigenvalue expansion and spectral gap of the weighted 1D operator.
"""

import logging
import math
from functools import partial
from typing import Annotated

import numpy as np
from pydantic import BaseModel, Field

from src.experiments.registry import register
from src.experiments.runner import ExperimentContext
from src.fitting import MIN_FIT_SAMPLES, fit_order
from src.model1d import (
    gap_check,
    halfline_length,
    quasimode,
    quasimode_residual,
    weighted_closeness_check,
    weighted_eigs,
)
from src.service.models import (
    DEFAULT_RHO,
    BoundaryCondition,
    Criterion,
    HGrid,
    WeightedProblem,
)

logger = logging.getLogger(__name__)

_SWEEP = [1e-2, 1e-3, 1e-4, 1e-5]


class QuasimodeParameters(BaseModel):
    h_values: HGrid = _SWEEP
    beta: Annotated[float, Field(description="β of the order sweep")] = 1.0
    rho: Annotated[float, Field(gt=1 / 3, lt=1 / 2)] = DEFAULT_RHO
    method: Annotated[str, Field(pattern="^(exact|finite-difference)$")] = "exact"
    target_slope: float = 1.5
    slope_tol: Annotated[float, Field(ge=0)] = 0.15
    unperturbed_max: Annotated[
        float, Field(gt=0, description="Largest bulk residual allowed at β = 0")
    ] = 1e-10
    normalization_bound: Annotated[
        float, Field(gt=0, description="Bound on |c_h(β) − c_h(0)|·h^{−1/2}")
    ] = 1.0
    expansion_betas: list[float] = [-1.0, 1.0]
    expansion_bound: Annotated[
        float, Field(gt=0, description="Bound on |λ₁ − μ^app|·h^{−3/2}")
    ] = 2.0


class GapParameters(BaseModel):
    h_values: HGrid = _SWEEP
    betas: list[float] = [1.0, -1.0]
    rho: Annotated[float, Field(gt=1 / 3, lt=1 / 2)] = DEFAULT_RHO
    n_elements: Annotated[int, Field(ge=100)] = 1000
    m_floor: Annotated[
        float, Field(ge=0, description="Lower bound asserted for the scaled deflated minimum")
    ] = 0.5
    closeness_max_n: Annotated[int, Field(ge=2)] = 5


# ============================================================================
# Quasimode order
# ============================================================================


def _residual_point(item, rho: float, method: str) -> dict:
    h, beta = item
    residual = quasimode_residual(h, beta, rho, method=method)
    logger.info("quasimode h=%g beta=%g: bulk residual %.3e", h, beta, residual.bulk)
    q = quasimode(h, beta, rho)
    q0 = quasimode(h, 0.0, rho)
    return {
        "h": h,
        "beta": beta,
        "bulk": residual.bulk,
        "tail": residual.tail,
        "total": residual.total,
        "resolved": residual.resolved,
        "c_h": q.c_h,
        "c_h_shift": abs(q.c_h - q0.c_h) / math.sqrt(h),
        "mu_app": q.mu_app,
    }


def _expansion_point(item, rho: float) -> dict:
    h, beta = item
    length = halfline_length(h, beta)
    prob = WeightedProblem(
        h=h, beta=beta, rho=rho, length=length, cap=BoundaryCondition.DIRICHLET
    )
    spectrum = weighted_eigs(prob, 1)
    mu_app = -1.0 - beta * math.sqrt(h) - beta * beta * h / 2
    lam = float(spectrum.eigenvalues[0])
    return {
        "h": h,
        "beta": beta,
        "length": length,
        "lambda": lam,
        "err_estimate": float(spectrum.errors[0]),
        "mu_app": mu_app,
        "scaled_deviation": abs(lam - mu_app) / h**1.5,
    }


@register("quasimode-order", QuasimodeParameters)
def run_quasimode(params: QuasimodeParameters, context: ExperimentContext) -> list[Criterion]:
    """Quasimode residual order, normalization constant and eigenvalue expansion."""
    points = [(h, params.beta) for h in params.h_values]
    points += [(h, 0.0) for h in params.h_values]
    results = context.grid_map(
        partial(_residual_point, rho=params.rho, method=params.method), points, "quasimode"
    )
    rows = [r for r in results if r is not None]
    context.write_rows("quasimode_residual", rows)

    criteria = []
    swept = [r for r in rows if r["beta"] == params.beta]
    if len(swept) >= MIN_FIT_SAMPLES:
        fit = fit_order(
            [r["h"] for r in swept],
            [r["bulk"] for r in swept],
            params.target_slope,
            params.slope_tol,
        )
        criteria.append(
            Criterion.build("bulk_residual_slope", fit.slope, params.target_slope, params.slope_tol, "abs_le")
        )
        total_fit = fit_order([r["h"] for r in swept], [r["total"] for r in swept])
        criteria.append(
            Criterion.build(
                "total_residual_slope", total_fit.slope, params.target_slope, params.slope_tol,
                "abs_le", asserted=False,
            )
        )
        criteria.append(
            Criterion.build(
                "residual_constant",
                max(r["bulk"] / r["h"] ** 1.5 for r in swept),
                0.0,
                0.0,
                "ge",
                asserted=False,
            )
        )
        criteria.append(
            Criterion.build(
                "normalization_shift_max",
                max(r["c_h_shift"] for r in swept),
                params.normalization_bound,
                0.0,
                "le",
            )
        )
    unperturbed = [r["bulk"] for r in rows if r["beta"] == 0.0]
    if unperturbed:
        criteria.append(
            Criterion.build("unperturbed_bulk_residual", max(unperturbed), params.unperturbed_max, 0.0, "le")
        )

    expansion_points = [(h, beta) for beta in params.expansion_betas for h in params.h_values]
    expansion = [
        r
        for r in context.grid_map(
            partial(_expansion_point, rho=params.rho), expansion_points, "expansion"
        )
        if r is not None
    ]
    context.write_rows("eigenvalue_expansion", expansion)
    for beta in params.expansion_betas:
        scaled = [r["scaled_deviation"] for r in expansion if r["beta"] == beta]
        if scaled:
            criteria.append(
                Criterion.build(
                    f"expansion_constant_beta{beta:+g}", max(scaled), params.expansion_bound, 0.0, "le"
                )
            )
    return criteria


# ============================================================================
# Spectral gap
# ============================================================================


def _gap_point(item, rho: float, n_elements: int, closeness_max_n: int) -> dict:
    h, beta = item
    report = gap_check(h, beta, rho, n_elements=n_elements)
    logger.info("gap h=%g beta=%g: lambda2 = %.6g", h, beta, report.lambda2)
    lines = weighted_closeness_check(
        WeightedProblem(h=h, beta=beta, rho=rho, cap=BoundaryCondition.DIRICHLET),
        closeness_max_n,
    )
    return {
        "h": h,
        "beta": beta,
        "lambda2": report.lambda2,
        "lambda2_scaled": report.lambda2 * (math.pi**2 / 8) / report.lower_bound,
        "deflated_min": report.deflated_min,
        "deflated_scaled": report.scaled_min,
        "lower_bound": report.lower_bound,
        "closeness": [line._asdict() for line in lines],
    }


@register("gap", GapParameters)
def run_gap(params: GapParameters, context: ExperimentContext) -> list[Criterion]:
    """Second eigenvalue and deflated Rayleigh minimum of the weighted operator."""
    points = [(h, beta) for beta in params.betas for h in params.h_values]
    results = [
        r
        for r in context.grid_map(
            partial(
                _gap_point,
                rho=params.rho,
                n_elements=params.n_elements,
                closeness_max_n=params.closeness_max_n,
            ),
            points,
            "gap",
        )
        if r is not None
    ]
    context.write_rows("gap", [{k: v for k, v in r.items() if k != "closeness"} for r in results])
    closeness_rows = [
        {"h": r["h"], "beta": r["beta"], **line} for r in results for line in r["closeness"]
    ]
    context.write_rows("weighted_closeness", closeness_rows)
    if not results:
        return []

    criteria = [
        Criterion.build(
            "lambda2_scaled_min",
            min(r["lambda2_scaled"] for r in results),
            math.pi**2 / 8,
            0.0,
            "ge",
        ),
        Criterion.build(
            "deflated_scaled_min",
            min(r["deflated_scaled"] for r in results),
            params.m_floor,
            0.0,
            "ge",
        ),
    ]
    first = [line for line in closeness_rows if line["n"] == 1]
    higher = [line for line in closeness_rows if line["n"] > 1]
    criteria.append(
        Criterion.build(
            "closeness_ground_state_violations",
            sum(not line["passed"] for line in first),
            0.0,
            0.0,
            "le",
            asserted=False,
        )
    )
    criteria.append(
        Criterion.build(
            "closeness_excited_violations",
            sum(not line["passed"] for line in higher),
            0.0,
            0.0,
            "le",
        )
    )
    worst = np.max([line["deviation"] / line["bound"] for line in higher]) if higher else None
    criteria.append(Criterion.build("closeness_excited_worst_ratio", worst, 1.0, 0.0, "le", asserted=False))
    return criteria
