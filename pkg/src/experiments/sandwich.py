"""
Effective-operator sandwich on a curved boundary:

    h^{3/2}λ_n(ℒ_h^{−c}) ≤ λ_n(𝒯_h) + h ≤ h^{3/2}λ_n(ℒ_h^{+c})

with the Neumann collar standing in for λ_n(𝒯_h) on the left and the Dirichlet collar on the
right. The smallest working c is searched separately for each side.
"""

import logging
import math
from functools import partial
from typing import Annotated

import numpy as np
from pydantic import BaseModel, Field

from src.effective_op import EffectiveOperator, eigs, explicit_bounds, pair_splitting
from src.experiments.registry import register
from src.experiments.runner import ExperimentContext
from src.geometry import curve_from_spec
from src.robin2d import collar_spectrum
from src.service.models import (
    BoundaryCondition,
    CollarDiscretization,
    Criterion,
    CurveSpec,
    DomainSpec,
    HGrid,
    RobinProblem,
)

logger = logging.getLogger(__name__)


class SandwichParameters(BaseModel):
    curve: CurveSpec = CurveSpec(kind="ellipse", a=2.0, b=1.0)
    h_values: HGrid = [4e-3, 1e-3]
    c_values: Annotated[list[float], Field(min_length=1)] = [0.5, 1.0, 2.0, 4.0, 8.0]
    c_max: Annotated[float, Field(gt=0)] = 8.0
    truncation: Annotated[int, Field(ge=8)] = 64
    depth_factor: Annotated[float, Field(gt=0)] = 8.0
    depth_cap: Annotated[
        float, Field(gt=0, lt=1, description="Largest δ·max|κ| used")
    ] = 0.9
    max_depth_curvature: Annotated[float, Field(gt=0, lt=1)] = 0.95
    mode_factor: Annotated[
        float, Field(gt=1, description="Fourier modes per expected Weyl index")
    ] = 1.3
    n_elements: Annotated[int, Field(ge=4)] = 150
    slack: Annotated[
        float, Field(ge=0, description="Extra slack in units of h^{3/2}")
    ] = 1e-9


def _collar_point(h: float, params: SandwichParameters) -> dict:
    curve = curve_from_spec(params.curve)
    depth = min(params.depth_factor * math.sqrt(h), params.depth_cap / curve.max_abs_curvature)
    expected = curve.half_perimeter / math.pi * h**-0.5
    n_modes = 2 * math.ceil(params.mode_factor * expected)
    prob = RobinProblem(h=h, domain=DomainSpec(kind="curve", curve=params.curve))
    spectra = {}
    for bc in (BoundaryCondition.DIRICHLET, BoundaryCondition.NEUMANN):
        disc = CollarDiscretization(
            n_modes=n_modes,
            n_elements=params.n_elements,
            inner_bc=bc,
            depth=depth,
            max_depth_curvature=params.max_depth_curvature,
        )
        result = collar_spectrum(curve, prob, disc)
        spectra[bc.value] = (result.eigenvalues, np.array([t.error or 0.0 for t in result.tags]))
    logger.info(
        "sandwich h=%g: δ=%.4g, Ns=%d, %d Dirichlet eigenvalues",
        h, depth, n_modes, spectra["dirichlet"][0].size,
    )
    return {"h": h, "depth": depth, "n_modes": n_modes, "spectra": spectra}


def _effective(curve, h: float, c: float, truncation: int, n_eigs: int) -> np.ndarray:
    """Lowest eigenvalues of ℒ_h^c, at most the 2K+1 the truncation resolves."""
    return eigs(EffectiveOperator(curve, h, c, truncation), min(n_eigs, 2 * truncation + 1))


def _side_holds(point: dict, curve, c: float, params: SandwichParameters, side: str) -> bool:
    h = point["h"]
    bc = "neumann" if side == "lower" else "dirichlet"
    values, errors = point["spectra"][bc]
    if values.size == 0:
        return True
    reference = _effective(curve, h, -c if side == "lower" else c, params.truncation, values.size)
    n = reference.size
    scaled = (values[:n] + h) / h**1.5
    slack = errors[:n] / h**1.5 + params.slack
    if side == "lower":
        return bool(np.all(reference <= scaled + slack))
    return bool(np.all(scaled - slack <= reference))


def _smallest_c(points, curve, params: SandwichParameters, side: str) -> float | None:
    for c in sorted(params.c_values):
        if all(_side_holds(p, curve, c, params, side) for p in points):
            return c
    return None


@register("effective-sandwich", SandwichParameters)
def run(params: SandwichParameters, context: ExperimentContext) -> list[Criterion]:
    """Collar eigenvalues of a curved domain between the effective operators ℒ_h^{∓c}."""
    curve = curve_from_spec(params.curve)
    points = [
        p
        for p in context.grid_map(partial(_collar_point, params=params), params.h_values, "h")
        if p is not None
    ]
    rows = []
    bound_rows = []
    for p in points:
        h = p["h"]
        for bc, (values, errors) in p["spectra"].items():
            if values.size == 0:
                continue
            effective = _effective(curve, h, 0.0, params.truncation, values.size)
            for n, (lam, err, eff) in enumerate(zip(values, errors, effective), start=1):
                rows.append(
                    {
                        "curve_id": params.curve.kind,
                        "h": h,
                        "inner_bc": bc,
                        "n": n,
                        "lambda": lam,
                        "err_est": err,
                        "scaled": (lam + h) / h**1.5,
                        "effective_c0": eff,
                        "depth": p["depth"],
                        "Ns": p["n_modes"],
                    }
                )
        values = p["spectra"]["dirichlet"][0]
        for n in range(2, values.size + 1):
            k = n // 2
            lower, upper = explicit_bounds(curve, h, k, 0.0)
            bound_rows.append(
                {"h": h, "n": n, "scaled": (values[n - 1] + h) / h**1.5, "lower": lower, "upper": upper}
            )
    context.write_rows("sandwich_spectra", rows)
    context.write_rows("explicit_bounds", bound_rows)

    c_lower = _smallest_c(points, curve, params, "lower") if points else None
    c_upper = _smallest_c(points, curve, params, "upper") if points else None
    found = max(c_lower, c_upper) if c_lower is not None and c_upper is not None else None
    criteria = [
        Criterion.build("c_minus", c_lower, params.c_max, 0.0, "le", asserted=False),
        Criterion.build("c_plus", c_upper, params.c_max, 0.0, "le", asserted=False),
        Criterion.build("sandwich_c", found, params.c_max, 0.0, "le"),
    ]
    if bound_rows:
        inside = np.mean([r["lower"] <= r["scaled"] <= r["upper"] for r in bound_rows])
        criteria.append(
            Criterion.build("explicit_bounds_fraction", float(inside), 1.0, 0.0, "ge", asserted=False)
        )
    for p in points:
        values = p["spectra"]["dirichlet"][0]
        if values.size >= 3:
            splitting = pair_splitting(values / p["h"] ** 1.5)
            criteria.append(
                Criterion.build(
                    f"pair_splitting_max_h{p['h']:g}", float(splitting.max()), 0.0, 0.0, "ge",
                    asserted=False,
                )
            )
    return criteria
