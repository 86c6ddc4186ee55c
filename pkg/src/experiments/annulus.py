"""
Annulus {r0 < |x| < 1} with Robin on both circles: exact per-mode roots against the DtN
counts, collar bracketing with one collar per boundary component, and the small-hole limit.
"""

import logging
import math
from collections import Counter
from functools import partial
from typing import Annotated

from pydantic import BaseModel, Field

from src.experiments.registry import register
from src.experiments.runner import ExperimentContext
from src.geometry import make_circle
from src.robin2d import (
    SpectrumResult,
    annulus_collar_spectrum,
    annulus_spectrum,
    disk_mode_eig,
)
from src.service.models import (
    BoundaryCondition,
    CollarDiscretization,
    Criterion,
    DomainSpec,
    HGrid,
    RobinProblem,
)
from src.steklov import annulus_dtn_count

logger = logging.getLogger(__name__)


class AnnulusParameters(BaseModel):
    inner_radius: Annotated[float, Field(gt=0, lt=1)] = 0.5
    h_values: HGrid = [1e-2, 4e-3]
    collar_depth: Annotated[float, Field(gt=0)] = 0.24
    max_depth_curvature: Annotated[float, Field(gt=0, lt=1)] = 0.5
    n_elements: Annotated[int, Field(ge=4)] = 400
    limit_radius: Annotated[
        float, Field(gt=0, lt=1, description="Small hole radius of the disk limit")
    ] = 0.05
    limit_h: Annotated[float, Field(gt=0, lt=1)] = 1e-2
    limit_modes: list[int] = [1, 2, 3]
    limit_tol: Annotated[float, Field(gt=0)] = 1e-8


def _annulus_problem(h: float, r0: float) -> RobinProblem:
    return RobinProblem(h=h, domain=DomainSpec(kind="annulus", inner_radius=r0))


def _annulus_point(h: float, params: AnnulusParameters) -> dict:
    prob = _annulus_problem(h, params.inner_radius)
    exact = annulus_spectrum(prob)
    sides = {}
    for bc in (BoundaryCondition.DIRICHLET, BoundaryCondition.NEUMANN):
        disc = CollarDiscretization(
            n_modes=2 * math.ceil(h**-0.5) + 16,
            n_elements=params.n_elements,
            inner_bc=bc,
            depth=params.collar_depth,
            max_depth_curvature=params.max_depth_curvature,
        )
        sides[bc.value] = annulus_collar_spectrum(prob, disc)
    logger.info(
        "annulus h=%g: %d exact, %d Dirichlet collar eigenvalues",
        h, exact.eigenvalues.size, sides["dirichlet"].eigenvalues.size,
    )
    return {"h": h, "exact": exact, **sides}


def _mode_root_counts(result: SpectrumResult, r0: float) -> tuple[int, int, int]:
    """
    Per-mode root counts of an exact annulus spectrum against the DtN counts.

    Returns the number of modes whose root count disagrees, the number of modes found with
    two roots and the number expected to have two.
    """
    found = {
        m: copies if m == 0 else copies // 2
        for m, copies in Counter(tag.mode for tag in result.tags).items()
    }
    expected = {}
    m = 0
    while (roots := annulus_dtn_count(result.h, r0, m)) > 0:
        expected[m] = roots
        m += 1
    mismatches = sum(found.get(m, 0) != expected.get(m, 0) for m in found.keys() | expected.keys())
    return (
        mismatches,
        sum(roots == 2 for roots in found.values()),
        sum(roots == 2 for roots in expected.values()),
    )


def _bracketing_violations(point: dict) -> tuple[int, int]:
    """Index-wise violations of Neumann ≤ exact ≤ Dirichlet, and the missing count."""
    exact = point["exact"].eigenvalues
    violations = 0
    for name, sign in (("dirichlet", 1.0), ("neumann", -1.0)):
        result = point[name]
        n = min(exact.size, result.eigenvalues.size)
        for i in range(n):
            err = result.tags[i].error or 0.0
            if sign * (result.eigenvalues[i] - exact[i]) < -err:
                violations += 1
    missing = max(0, point["dirichlet"].eigenvalues.size - exact.size) + max(
        0, exact.size - point["neumann"].eigenvalues.size
    )
    return violations, missing


def _limit_point(m: int, params: AnnulusParameters) -> dict:
    """The annulus eigenvalue of mode m nearest to the disk one."""
    h = params.limit_h
    disk = disk_mode_eig(h, m)
    result = annulus_spectrum(_annulus_problem(h, params.limit_radius))
    candidates = [lam for lam, tag in zip(result.eigenvalues, result.tags) if tag.mode == m]
    annulus = min(candidates, key=lambda lam: abs(lam - disk)) if candidates and disk is not None else None
    return {
        "m": m,
        "disk": disk,
        "annulus": annulus,
        "deviation": abs(annulus - disk) if annulus is not None else None,
    }


@register("annulus", AnnulusParameters)
def run(params: AnnulusParameters, context: ExperimentContext) -> list[Criterion]:
    """Exact annulus eigenvalues, two-component collar bracketing and the small-hole limit."""
    r0 = params.inner_radius
    points = [
        p
        for p in context.grid_map(partial(_annulus_point, params=params), params.h_values, "h")
        if p is not None
    ]
    rows = []
    count_mismatches = 0
    two_root_modes = 0
    expected_two_root = 0
    for p in points:
        h = p["h"]
        exact = p["exact"]
        mismatches, found, expected = _mode_root_counts(exact, r0)
        count_mismatches += mismatches
        two_root_modes += found
        expected_two_root += expected
        for n, (lam, tag) in enumerate(zip(exact.eigenvalues, exact.tags), start=1):
            rows.append(
                {"h": h, "n": n, "m": tag.mode, "lambda": lam, "method": tag.method,
                 "component": "", "inner_bc": "", "err_est": ""}
            )
        for bc in ("dirichlet", "neumann"):
            for n, (lam, tag) in enumerate(zip(p[bc].eigenvalues, p[bc].tags), start=1):
                rows.append(
                    {"h": h, "n": n, "m": tag.mode, "lambda": lam, "method": tag.method,
                     "component": tag.component, "inner_bc": bc, "err_est": tag.error}
                )
    context.write_rows("annulus_spectra", rows)

    limit = [
        r
        for r in context.grid_map(partial(_limit_point, params=params), params.limit_modes, "m")
        if r is not None
    ]
    context.write_rows("small_hole_limit", limit)

    bracketing = [_bracketing_violations(p) for p in points]
    deviations = [r["deviation"] for r in limit if r["deviation"] is not None]
    hole = make_circle(r0, hole=True)
    criteria = [
        Criterion.build("dtn_count_mismatches", count_mismatches, 0.0, 0.0, "le"),
        Criterion.build("two_root_modes", two_root_modes, expected_two_root, 0.0, "abs_le"),
        Criterion.build(
            "collar_bracketing_violations", sum(v for v, _ in bracketing), 0.0, 0.0, "le"
        ),
        Criterion.build(
            "collar_bracketing_missing", sum(m for _, m in bracketing), 0.0, 0.0, "le",
            asserted=False,
        ),
        Criterion.build("hole_curvature", hole.kappa_max, -1.0 / r0, 1e-8, "abs_le"),
        Criterion.build(
            "small_hole_deviation_max",
            max(deviations) if len(deviations) == len(params.limit_modes) else None,
            params.limit_tol,
            0.0,
            "le",
        ),
    ]
    for p in points:
        inner = sum(tag.component == "inner" for tag in p["dirichlet"].tags)
        criteria.append(
            Criterion.build(f"inner_component_eigs_h{p['h']:g}", inner, 1.0, 0.0, "ge", asserted=False)
        )
    return criteria
