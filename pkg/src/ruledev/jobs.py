"""Job specification schema and the shared runner behind the CLI and service."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import formats
from .errors import ValidationError
from .objective import Weights
from .optimizer import SolverOptions
from .pipelines import (
    OuterOptions,
    PipelineResult,
    fit_fixed_boundary,
    fit_relaxed,
    subdivide_rulings,
)
from .splines import SplineCurve
from .surface import RulingSequence

MODE_NAMES = ("fixed-boundary", "relaxed")


class RulingModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    q: List[float] = Field(min_length=3, max_length=3)
    p: List[float] = Field(min_length=3, max_length=3)


class CurveModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    degree: int = Field(ge=1)
    knots: List[float]
    control_points: List[List[float]]

    def to_curve(self) -> SplineCurve:
        return formats.curve_from_obj(self.model_dump(), "curve")


class WeightsModel(BaseModel):
    """Optional overrides; unset fields fall back to the mode defaults."""

    model_config = ConfigDict(extra="forbid")
    lambda_energy: Optional[float] = Field(default=None, ge=0)
    lambda_width: Optional[float] = Field(default=None, ge=0)
    lambda_interior: Optional[float] = Field(default=None, ge=0)
    lambda_closeness: Optional[float] = Field(default=None, ge=0)
    lambda_unit: Optional[float] = Field(default=None, ge=0)

    def resolve(self, mode: str) -> Weights:
        base = (
            Weights.for_fixed_boundary() if mode == "fixed-boundary" else Weights.for_relaxed()
        )
        overrides = {k: v for k, v in self.model_dump().items() if v is not None}
        return replace(base, **overrides) if overrides else base


class SolverModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    memory: int = Field(default=10, ge=1)
    max_iterations: int = Field(default=500, ge=1)
    gradient_tolerance: float = Field(default=1e-8, gt=0)
    step_tolerance: float = Field(default=1e-12, gt=0)

    def resolve(self) -> SolverOptions:
        return SolverOptions(**self.model_dump())


class OuterModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    max_outer: int = Field(default=20, ge=1)
    rel_improve_tol: float = Field(default=1e-3, gt=0)

    def resolve(self) -> OuterOptions:
        return OuterOptions(**self.model_dump())


class JobSpec(BaseModel):
    """Everything needed to run one fitting job."""

    model_config = ConfigDict(extra="forbid")
    mode: Literal["fixed-boundary", "relaxed"]
    rulings: List[RulingModel] = Field(min_length=2)
    curve: Optional[CurveModel] = None
    weights: WeightsModel = Field(default_factory=WeightsModel)
    samples: int = Field(default=100, ge=1)
    solver: SolverModel = Field(default_factory=SolverModel)
    outer: OuterModel = Field(default_factory=OuterModel)
    exports: List[Literal["control-net", "mesh", "metrics"]] = Field(
        default_factory=lambda: ["metrics"]
    )
    mesh_grid: Tuple[int, int] = (100, 10)
    refine: int = Field(default=0, ge=0)
    literal_closeness: bool = False

    @model_validator(mode="after")
    def _fixed_needs_curve(self):
        if self.mode == "fixed-boundary" and self.curve is None:
            raise ValueError("fixed-boundary mode requires a fixed curve")
        return self

    def ruling_sequence(self) -> RulingSequence:
        return formats.rulings_from_obj(
            [{"q": r.q, "p": r.p} for r in self.rulings]
        )


@dataclass(frozen=True)
class JobOutput:
    result: PipelineResult
    exports: dict


def run_job(spec: JobSpec) -> JobOutput:
    """Run the pipeline described by a JobSpec and produce its exports.

    The CLI and the HTTP service both call this, so identical specs yield
    identical results on either surface.
    """
    rulings = spec.ruling_sequence()
    if spec.refine:
        rulings = subdivide_rulings(rulings, spec.refine)
    weights = spec.weights.resolve(spec.mode)
    solver = spec.solver.resolve()

    if spec.mode == "fixed-boundary":
        result = fit_fixed_boundary(
            spec.curve.to_curve(), rulings, weights=weights,
            samples=spec.samples, solver_options=solver,
        )
    else:
        result = fit_relaxed(
            rulings, weights=weights, samples=spec.samples,
            outer=spec.outer.resolve(), solver_options=solver,
            literal_closeness=spec.literal_closeness,
        )

    exports = formats.export_result(
        result, spec.exports, mode=spec.mode, mesh_grid=tuple(spec.mesh_grid)
    )
    return JobOutput(result=result, exports=exports)


def spec_from_obj(obj) -> JobSpec:
    """Validate a raw dict into a JobSpec, mapping pydantic errors to ours."""
    try:
        return JobSpec.model_validate(obj)
    except Exception as exc:
        raise ValidationError(f"invalid job spec: {exc}") from exc
