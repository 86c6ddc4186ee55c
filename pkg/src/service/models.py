"""
Pydantic models for the Robin spectral lab.
"""

import math
from enum import Enum
from typing import Annotated, Literal

from pydantic import AfterValidator, BaseModel, ConfigDict, Field

from src.service.arg_checkers import check_geometric
from src.service.exceptions import InvalidParameterError

DEFAULT_RHO = 7 / 16
MIN_RHO = 1 / 3
MAX_RHO = 1 / 2

MIN_WEIGHTED_ELEMENTS = 200
DEFAULT_WEIGHTED_ELEMENTS = 4000

DEFAULT_COLLAR_MODES = 32
DEFAULT_COLLAR_ELEMENTS = 400
MAX_COLLAR_UNKNOWNS = 200_000


class BoundaryCondition(str, Enum):
    """Condition imposed at an artificial inner boundary (interval cap or collar edge)."""

    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


# ============================================================================
# Problem descriptors
# ============================================================================


class IntervalProblem(BaseModel):
    """Robin interval (0, T) with a Dirichlet or Neumann cap at τ = T."""

    model_config = ConfigDict(frozen=True)

    length: Annotated[
        float, Field(description="Interval length T (dimensionless), T > 1", gt=1.0)
    ]
    cap: Annotated[
        BoundaryCondition, Field(description="Condition at τ = T")
    ] = BoundaryCondition.DIRICHLET


class WeightedProblem(BaseModel):
    """Curvature-weighted Robin operator on (0, T) with weight 1 − h^{1/2}βτ."""

    model_config = ConfigDict(frozen=True)

    h: Annotated[float, Field(description="Semiclassical parameter", gt=0.0, lt=1.0)]
    beta: Annotated[float, Field(description="Curvature surrogate β")] = 0.0
    rho: Annotated[
        float,
        Field(
            description=f"Collar exponent ρ (Range: {MIN_RHO:.4f} to {MAX_RHO})",
            gt=MIN_RHO,
            lt=MAX_RHO,
        ),
    ] = DEFAULT_RHO
    cap: Annotated[
        BoundaryCondition, Field(description="Condition at τ = T")
    ] = BoundaryCondition.DIRICHLET
    n_elements: Annotated[
        int,
        Field(
            description="Number of piecewise-linear elements on the coarse grid",
            ge=MIN_WEIGHTED_ELEMENTS,
        ),
    ] = DEFAULT_WEIGHTED_ELEMENTS
    length: Annotated[
        float | None,
        Field(description="Interval length overriding T = h^(ρ−1/2)", gt=1.0),
    ] = None

    @property
    def interval_length(self) -> float:
        """T, either the override or h^(ρ − 1/2)."""
        if self.length is not None:
            return self.length
        return self.h ** (self.rho - 0.5)


class CurveSpec(BaseModel):
    """Description of a smooth closed boundary curve."""

    model_config = ConfigDict(frozen=True)

    kind: Annotated[
        Literal["circle", "ellipse", "fourier"], Field(description="Curve family")
    ]
    radius: Annotated[float | None, Field(description="Circle radius", gt=0.0)] = None
    a: Annotated[float | None, Field(description="Ellipse major semi-axis", gt=0.0)] = (
        None
    )
    b: Annotated[float | None, Field(description="Ellipse minor semi-axis", gt=0.0)] = (
        None
    )
    coefficients: Annotated[
        list[tuple[int, float, float]] | None,
        Field(description="Fourier curve terms (j, re, im) of z(θ) = Σ c_j e^{ijθ}"),
    ] = None


class DomainSpec(BaseModel):
    """A planar domain: a disk, an annulus, or the interior of a curve."""

    model_config = ConfigDict(frozen=True)

    kind: Annotated[
        Literal["disk", "annulus", "curve"], Field(description="Domain family")
    ]
    radius: Annotated[float, Field(description="Disk or outer radius", gt=0.0)] = 1.0
    inner_radius: Annotated[
        float | None, Field(description="Annulus inner radius r0", gt=0.0, lt=1.0)
    ] = None
    curve: Annotated[
        CurveSpec | None, Field(description="Boundary curve for curve domains")
    ] = None

    @property
    def boundary_length(self) -> float:
        """|Γ| for disk and annulus domains (curve domains ask the curve)."""
        if self.kind == "disk":
            return 2 * math.pi * self.radius
        if self.kind == "annulus":
            return 2 * math.pi * (1.0 + (self.inner_radius or 0.0))
        raise ValueError("boundary length of a curve domain comes from the curve")


class RobinProblem(BaseModel):
    """The operator −h²Δ with ∂u/∂ν = h^{−1/2}u on a domain, and an eigenvalue window."""

    model_config = ConfigDict(frozen=True)

    h: Annotated[float, Field(description="Semiclassical parameter", gt=0.0, lt=1.0)]
    domain: Annotated[DomainSpec, Field(description="The domain Ω")]
    epsilon: Annotated[
        float,
        Field(
            description="Window parameter: eigenvalues below ε·h² are collected",
            ge=0.0,
        ),
    ] = 0.0

    @property
    def window(self) -> float:
        """Absolute eigenvalue window ε·h²."""
        return self.epsilon * self.h**2


class CollarDiscretization(BaseModel):
    """Fourier(s) × P1(t) discretization of the boundary collar [−L, L) × [0, δ]."""

    model_config = ConfigDict(frozen=True)

    rho: Annotated[
        float, Field(description="Collar exponent ρ, δ = h^ρ", gt=MIN_RHO, lt=MAX_RHO)
    ] = DEFAULT_RHO
    n_modes: Annotated[
        int,
        Field(
            description="Fourier modes Ns in s; indices |k| <= Ns // 2 are kept",
            ge=1,
        ),
    ] = DEFAULT_COLLAR_MODES
    n_elements: Annotated[
        int, Field(description="Piecewise-linear elements Nt in t", ge=4)
    ] = DEFAULT_COLLAR_ELEMENTS
    inner_bc: Annotated[
        BoundaryCondition, Field(description="Condition at t = δ")
    ] = BoundaryCondition.DIRICHLET
    depth: Annotated[
        float | None, Field(description="Collar depth overriding δ = h^ρ", gt=0.0)
    ] = None
    max_depth_curvature: Annotated[
        float,
        Field(description="Upper bound for δ·max|κ|", gt=0.0, lt=1.0),
    ] = 0.5
    richardson: Annotated[
        bool, Field(description="Extrapolate from Nt and 2Nt elements")
    ] = True

    def collar_depth(self, h: float) -> float:
        """δ, either the override or h^ρ."""
        if self.depth is not None:
            return self.depth
        return h**self.rho


# ============================================================================
# Reports
# ============================================================================


class FitReport(BaseModel):
    """Least-squares fit of log y against log x, checked against a target slope."""

    slope: Annotated[float, Field(description="Fitted slope")]
    intercept: Annotated[float, Field(description="Fitted intercept (log scale)")]
    residual_rms: Annotated[float, Field(description="RMS of the log residuals")]
    samples: Annotated[int, Field(description="Number of points in the fit", ge=2)]
    target: Annotated[float | None, Field(description="Declared target slope")] = None
    tol: Annotated[float | None, Field(description="Allowed slope deviation")] = None
    passed: Annotated[
        bool | None, Field(description="Whether |slope − target| <= tol")
    ] = None


class DecayReport(BaseModel):
    """Decay checks of one eigenfunction."""

    h: Annotated[float, Field(description="Semiclassical parameter")]
    index: Annotated[int, Field(description="Eigenvalue index in its spectrum")]
    w: Annotated[float, Field(description="Spectral parameter w = λ/h²")]
    rate: Annotated[float | None, Field(description="Fitted exponential rate r")] = (
        None
    )
    normalized_rate: Annotated[float | None, Field(description="r·√h")] = None
    quadratic_coefficient: Annotated[
        float | None, Field(description="Fitted quadratic term of log|u| (report only)")
    ] = None
    polynomial_sup: Annotated[
        dict[int, float], Field(description="sup |u|·(d²/h)^p keyed by p")
    ] = {}
    agmon_ratio: Annotated[float | None, Field(description="Weighted energy ratio")] = (
        None
    )
    pointwise_sup: Annotated[
        float | None, Field(description="Scaled pointwise sup")
    ] = None
    analytic_sup: Annotated[
        float | None, Field(description="Scaled analytic-boundary sup")
    ] = None
    checks: Annotated[
        dict[str, bool], Field(description="Pass/fail per named criterion")
    ] = {}


Comparison = Literal["le", "ge", "abs_le"]


class Criterion(BaseModel):
    """One pass/fail (or report-only) line of an experiment summary."""

    model_config = ConfigDict(populate_by_name=True)

    name: Annotated[str, Field(description="Criterion name")]
    value: Annotated[float | None, Field(description="Measured value")]
    target: Annotated[float, Field(description="Target value")]
    tol: Annotated[float, Field(description="Tolerance", ge=0.0)]
    comparison: Annotated[
        Comparison,
        Field(description="le: value <= target + tol; ge: value >= target − tol; "
              "abs_le: |value − target| <= tol"),
    ]
    asserted: Annotated[
        bool, Field(description="False for report-only quantities")
    ] = True
    passed: Annotated[bool, Field(alias="pass", description="Outcome")] = False

    @staticmethod
    def evaluate(
        value: float | None, target: float, tol: float, comparison: Comparison
    ) -> bool:
        """Pure pass/fail rule shared by the runner and the checker."""
        if value is None or not math.isfinite(value):
            return False
        if comparison == "le":
            return value <= target + tol
        if comparison == "ge":
            return value >= target - tol
        return abs(value - target) <= tol

    @classmethod
    def build(
        cls,
        name: str,
        value: float | None,
        target: float,
        tol: float = 0.0,
        comparison: Comparison = "le",
        asserted: bool = True,
    ) -> "Criterion":
        """Create a criterion with its pass flag computed."""
        if value is not None:
            value = float(value)
            if not math.isfinite(value):
                value = None
        return cls(
            name=name,
            value=value,
            target=target,
            tol=tol,
            comparison=comparison,
            asserted=asserted,
            passed=cls.evaluate(value, target, tol, comparison),
        )


class ExperimentSummary(BaseModel):
    """Machine-readable outcome of one experiment run."""

    experiment: Annotated[str, Field(description="Experiment id")]
    status: Annotated[
        Literal["passed", "failed", "partial"], Field(description="Overall outcome")
    ]
    criteria: Annotated[list[Criterion], Field(description="Criteria in order")]
    errors: Annotated[
        list[str], Field(description="Grid-point failures collected during the run")
    ] = []
    version: Annotated[str, Field(description="Lab version that produced the run")]


class ExperimentConfig(BaseModel):
    """An experiment configuration file after template rendering."""

    experiment: Annotated[str, Field(description="Registered experiment id")]
    description: Annotated[str, Field(description="Free text")] = ""
    output_dir: Annotated[
        str | None, Field(description="Output directory (defaults under output_root)")
    ] = None
    parameters: Annotated[
        dict, Field(description="Experiment-specific parameters")
    ] = {}


def _h_grid(values: list[float]) -> list[float]:
    try:
        check_geometric(values, "h grid")
    except InvalidParameterError as e:
        raise ValueError(str(e)) from e
    if any(not 0 < h < 1 for h in values):
        raise ValueError(f"h values must lie in (0, 1), got {values}")
    return values


HGrid = Annotated[
    list[float],
    AfterValidator(_h_grid),
    Field(description="Decreasing h sweep, consecutive ratio at most 1/2"),
]
