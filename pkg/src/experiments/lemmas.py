"""
One-dimensional interval lemmas: the negative eigenvalue of the capped interval, the positive
eigenvalue brackets for both caps, cap monotonicity and the weighted closeness of the ground
state to the half-line one.
"""

import logging
import math
from typing import Annotated

import numpy as np
from pydantic import BaseModel, Field

from src.experiments.registry import register
from src.experiments.runner import ExperimentContext
from src.model1d import (
    halfline_ground_state,
    interval_eigenfunction,
    interval_negative_eig,
    interval_positive_eigs,
    positive_eig_bracket,
)
from src.service.models import BoundaryCondition, Criterion, IntervalProblem

logger = logging.getLogger(__name__)

CLOSENESS_POINTS = 20001


class LemmaParameters(BaseModel):
    lengths: Annotated[list[float], Field(min_length=1, description="Interval lengths T")] = [
        2.0,
        5.0,
        10.0,
    ]
    n_max: Annotated[int, Field(ge=2, description="Largest bracketed index")] = 10
    ratio_tolerances: Annotated[
        dict[float, float],
        Field(description="Allowed |(λ₁+1)/(4e^{−2T}) − 1| per asserted T"),
    ] = {5.0: 0.05, 10.0: 0.001}
    closeness_lengths: Annotated[
        list[float], Field(description="T values of the weighted closeness sweep")
    ] = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
    closeness_slope: Annotated[
        float, Field(gt=0, description="Allowed sup e^τ|Δu| + sup e^τ|Δu'| per unit T")
    ] = 3.0


def _weighted_deviation(length: float) -> float:
    """sup e^τ|u_T − u_1| + sup e^τ|u_T' − u_1'| on (0, T) for the Dirichlet cap."""
    tau = np.linspace(0.0, length, CLOSENESS_POINTS)
    u, du = interval_eigenfunction(
        IntervalProblem(length=length, cap=BoundaryCondition.DIRICHLET), tau
    )
    u1 = halfline_ground_state(tau)
    weight = np.exp(tau)
    return float(np.max(weight * np.abs(u - u1)) + np.max(weight * np.abs(du + u1)))


@register("model1d-lemmas", LemmaParameters)
def run(params: LemmaParameters, context: ExperimentContext) -> list[Criterion]:
    """Interval eigenvalue lemmas for Dirichlet and Neumann caps."""
    criteria = []
    rows = []
    for length in params.lengths:
        dirichlet = IntervalProblem(length=length, cap=BoundaryCondition.DIRICHLET)
        neumann = IntervalProblem(length=length, cap=BoundaryCondition.NEUMANN)
        lam_d = interval_negative_eig(dirichlet)
        lam_n = interval_negative_eig(neumann)
        logger.info("T=%g: negative eigenvalues %.12g (Dirichlet), %.12g (Neumann)", length, lam_d, lam_n)
        scale = 4 * math.exp(-2 * length)
        ratio = abs((lam_d + 1) / scale - 1)
        tol = params.ratio_tolerances.get(length)
        criteria.append(
            Criterion.build(
                f"dirichlet_negative_ratio_T{length:g}",
                ratio,
                0.0,
                tol if tol is not None else 0.0,
                "le",
                asserted=tol is not None,
            )
        )
        # λ₁ + 1 for the Neumann cap: negative, i.e. −1 − 4e^{−2T} to leading order
        criteria.append(
            Criterion.build(
                f"neumann_negative_shift_T{length:g}",
                (lam_n + 1) / scale,
                -1.0,
                0.1,
                "abs_le",
                asserted=False,
            )
        )
        rows.append({"T": length, "cap": "dirichlet", "n": 1, "lambda": lam_d, "lo": "", "hi": ""})
        rows.append({"T": length, "cap": "neumann", "n": 1, "lambda": lam_n, "lo": "", "hi": ""})

        positive = {
            cap: interval_positive_eigs(prob, params.n_max)
            for cap, prob in ((BoundaryCondition.DIRICHLET, dirichlet), (BoundaryCondition.NEUMANN, neumann))
        }
        for cap, values in positive.items():
            inside = 0
            stated_inside = 0
            for n, lam in enumerate(values, start=2):
                lo, hi = positive_eig_bracket(cap, length, n)
                s_lo, s_hi = positive_eig_bracket(cap, length, n, stated=True)
                inside += lo < lam < hi
                stated_inside += s_lo < lam < s_hi
                rows.append({"T": length, "cap": cap.value, "n": n, "lambda": lam, "lo": lo, "hi": hi})
            count = len(values)
            criteria.append(
                Criterion.build(
                    f"{cap.value}_brackets_T{length:g}", inside, count, 0.0, "abs_le"
                )
            )
            if cap == BoundaryCondition.DIRICHLET:
                criteria.append(
                    Criterion.build(
                        f"dirichlet_stated_brackets_T{length:g}",
                        stated_inside,
                        count,
                        0.0,
                        "abs_le",
                        asserted=False,
                    )
                )
        violations = int(
            np.sum(positive[BoundaryCondition.NEUMANN] > positive[BoundaryCondition.DIRICHLET])
            + (lam_n > lam_d)
        )
        criteria.append(
            Criterion.build(f"cap_monotonicity_violations_T{length:g}", violations, 0.0, 0.0, "le")
        )

    closeness = [
        {"T": length, "weighted_deviation": _weighted_deviation(length)}
        for length in params.closeness_lengths
    ]
    worst = max(row["weighted_deviation"] / row["T"] for row in closeness)
    criteria.append(
        Criterion.build("closeness_per_unit_length", worst, params.closeness_slope, 0.0, "le")
    )
    context.write_rows("interval_eigenvalues", rows)
    context.write_rows("ground_state_closeness", closeness)
    return criteria
