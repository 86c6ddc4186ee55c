"""
Boundary localization of disk eigenfunctions: fitted decay rate, weighted energy bound,
polynomial and pointwise bounds, with negative controls past the admissible weight.
"""

import logging
import math
from functools import partial
from typing import Annotated

from pydantic import BaseModel, Field

from src.decay import (
    DecayParameters,
    agmon_ratio,
    bounded_along,
    decay_report,
    fit_decay_rate,
    pointwise_prefactor_check,
    polynomial_bound_check,
    profile_rows,
)
from src.experiments.registry import register
from src.experiments.runner import ExperimentContext
from src.geometry import make_circle
from src.robin2d import collar_spectrum, disk_spectrum, mode_profile
from src.service.models import (
    CollarDiscretization,
    Criterion,
    DomainSpec,
    HGrid,
    RobinProblem,
)

logger = logging.getLogger(__name__)


class DecaySuiteParameters(BaseModel):
    h_values: HGrid = [1e-2, 1e-3, 1e-4]
    alpha: Annotated[float, Field(ge=0)] = 0.81
    big_m: Annotated[float, Field(gt=0, lt=1)] = 0.81
    eps0: Annotated[float, Field(gt=0)] = 0.5
    eta: Annotated[float, Field(gt=0, lt=1)] = 0.1
    rate_range: tuple[float, float] = (0.9, 1.05)
    rate_h_max: Annotated[
        float, Field(gt=0, description="Largest h at which the rate is compared with √(−w)")
    ] = 1e-3
    bound_factor: Annotated[
        float, Field(gt=1, description="Allowed growth of a bounded quantity along the sweep")
    ] = 10.0
    control_alpha_factor: Annotated[
        float, Field(gt=1, description="α of the negative control in units of √M")
    ] = 1.2
    control_growth: Annotated[float, Field(gt=1)] = 10.0
    control_shift: float = -0.2
    collar_h: Annotated[
        float | None, Field(gt=0, lt=1, description="h of the collar rate comparison")
    ] = 1e-3
    collar_rate_tol: Annotated[float, Field(gt=0)] = 0.01
    collar_depth_factor: Annotated[float, Field(gt=0, description="Collar depth in units of √h")] = 10.0
    collar_elements: Annotated[int, Field(ge=4)] = 1000


def _ground_mode(h: float, params: DecaySuiteParameters) -> dict:
    result = disk_spectrum(RobinProblem(h=h, domain=DomainSpec(kind="disk")))
    mode = mode_profile(result, 0)
    decay = DecayParameters(alpha=params.alpha, big_m=params.big_m, eps0=params.eps0, eta=params.eta)
    report = decay_report(mode, 0, decay, curvature=1.0)
    logger.info("decay h=%g: r√h = %.4f", h, report.normalized_rate)
    control_alpha = params.control_alpha_factor * math.sqrt(params.big_m)
    return {
        "report": report,
        "profile": profile_rows(mode),
        "control_agmon": agmon_ratio(mode, control_alpha, params.big_m, strict=False),
        "control_pointwise": pointwise_prefactor_check(
            mode, params.alpha, params.big_m, params.eps0, params.control_shift
        ),
        "polynomial_p2": polynomial_bound_check(mode, 2, 0.0),
        "polynomial_p4": polynomial_bound_check(mode, 4, 0.0),
    }


def _collar_rate(h: float, params: DecaySuiteParameters) -> tuple[float, float]:
    """Fitted rates of the disk ground state from the collar solver and from Bessel."""
    prob = RobinProblem(h=h, domain=DomainSpec(kind="disk"))
    # every Fourier mode with a negative eigenvalue must fit inside |k| < Ns // 2
    disc = CollarDiscretization(
        n_modes=2 * math.ceil(h**-0.5) + 16,
        n_elements=params.collar_elements,
        depth=params.collar_depth_factor * math.sqrt(h),
        richardson=False,
    )
    collar = collar_spectrum(make_circle(1.0), prob, disc)
    exact = disk_spectrum(prob)
    return (
        fit_decay_rate(mode_profile(collar, 0)).rate,
        fit_decay_rate(mode_profile(exact, 0)).rate,
    )


@register("decay-suite", DecaySuiteParameters)
def run(params: DecaySuiteParameters, context: ExperimentContext) -> list[Criterion]:
    """Decay of the disk ground state into the interior."""
    results = context.grid_map(partial(_ground_mode, params=params), params.h_values, "h")
    points = [(h, r) for h, r in zip(params.h_values, results) if r is not None]
    if not points:
        return []
    points.sort(key=lambda p: -p[0])

    context.write_rows(
        "decay_reports",
        [
            {
                "h": h,
                "w": r["report"].w,
                "rate": r["report"].rate,
                "normalized_rate": r["report"].normalized_rate,
                "quadratic_coefficient": r["report"].quadratic_coefficient,
                "agmon_ratio": r["report"].agmon_ratio,
                "pointwise_sup": r["report"].pointwise_sup,
                "analytic_sup": r["report"].analytic_sup,
                "polynomial_p2": r["polynomial_p2"],
                "polynomial_p4": r["polynomial_p4"],
                "control_agmon": r["control_agmon"],
                "control_pointwise": r["control_pointwise"],
            }
            for h, r in points
        ],
    )
    for h, r in points:
        context.write_rows(f"profile_h{h:g}", r["profile"])

    lo, hi = params.rate_range
    rates = [r["report"].normalized_rate for _, r in points]
    agmon = [r["report"].agmon_ratio for _, r in points]
    polynomial = [r["polynomial_p2"] for _, r in points]
    polynomial_p4 = [r["polynomial_p4"] for _, r in points]
    pointwise = [r["report"].pointwise_sup for _, r in points]
    analytic = [r["report"].analytic_sup for _, r in points]
    control = [r["control_agmon"] for _, r in points]
    criteria = [
        Criterion.build("normalized_rate_min", min(rates), lo, 0.0, "ge"),
        Criterion.build("normalized_rate_max", max(rates), hi, 0.0, "le"),
        Criterion.build(
            "agmon_ratio_growth", max(agmon) / agmon[0], params.bound_factor, 0.0, "le"
        ),
        Criterion.build(
            "polynomial_p2_growth", max(polynomial) / polynomial[0], params.bound_factor, 0.0, "le"
        ),
        Criterion.build(
            "polynomial_p4_growth",
            max(polynomial_p4) / polynomial_p4[0],
            params.bound_factor,
            0.0,
            "le",
        ),
        Criterion.build(
            "pointwise_bounded", float(bounded_along(pointwise, params.bound_factor)), 1.0, 0.0, "ge",
        ),
        Criterion.build(
            "analytic_bounded", float(bounded_along(analytic, params.bound_factor)), 1.0, 0.0, "ge",
        ),
        Criterion.build(
            "control_agmon_growth", max(control) / control[0], params.control_growth, 0.0, "ge"
        ),
        Criterion.build(
            "control_pointwise_growth",
            max(r["control_pointwise"] for _, r in points) / points[0][1]["control_pointwise"],
            params.control_growth,
            0.0,
            "ge",
            asserted=False,
        ),
    ]
    for h, r in points:
        matches = r["report"].checks.get("rate_matches_w")
        if matches is not None:
            criteria.append(
                Criterion.build(
                    f"rate_matches_w_h{h:g}",
                    float(matches),
                    1.0,
                    0.0,
                    "ge",
                    asserted=h <= params.rate_h_max,
                )
            )

    if params.collar_h is not None:
        (pair,) = context.grid_map(partial(_collar_rate, params=params), [params.collar_h], "collar")
        deviation = abs(pair[0] / pair[1] - 1) if pair is not None else None
        criteria.append(
            Criterion.build("collar_rate_deviation", deviation, params.collar_rate_tol, 0.0, "le")
        )
    return criteria
