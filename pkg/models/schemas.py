from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.assembly import BoundaryCondition, ResolventSide
from core.clifford import SOLVER_DIM
from core.fields import Geometry
from core.regions import RegionKind, RobinCoeffMode


class Command(str, Enum):
    IDENTITIES = "identities"
    REGION = "region"
    SOLVE = "solve"
    COERCIVITY = "coercivity"
    RESOLVENT = "resolvent"
    TRACE_NORM = "trace-norm"


DEFAULT_TRIALS = {
    Command.IDENTITIES: 200,
    Command.COERCIVITY: 1000,
    Command.RESOLVENT: 20,
    Command.SOLVE: 1,
}

CLASSIFY = "classify"


def _split(value: Any) -> Any:
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    if isinstance(value, (int, float)):
        return [value]
    return value


class RunConfig(BaseModel):
    """Resolved run configuration; file values first, flags on top"""

    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    command: Command
    geometry: Geometry = Geometry.HYPERBOLIC
    bc: BoundaryCondition = BoundaryCondition.DIRICHLET
    kind: Optional[str] = None
    n: int = Field(2, ge=1)
    lo: Optional[List[float]] = None
    hi: Optional[List[float]] = None
    res: List[int] = Field(default_factory=lambda: [32])
    m: Optional[float] = None
    M: Optional[float] = None
    s0: float = 0.0
    s1: float = 0.0
    s0_min: float = -5.0
    s0_max: float = 5.0
    s1_min: float = 0.0
    s1_max: float = 15.0
    s0_res: int = 200
    s1_res: int = 200
    b_norm: float = 0.0
    trace_norm: Union[float, Literal["estimate"]] = "estimate"
    trace_safety: float = Field(2.0, gt=0)
    c_p: Union[float, Literal["auto"]] = "auto"
    robin_coeff_mode: RobinCoeffMode = RobinCoeffMode.PROOF
    seed: int = 42
    trials: Optional[int] = Field(None, ge=0)
    n_list: List[int] = Field(default_factory=lambda: [2, 3, 4])
    side: ResolventSide = ResolventSide.RIGHT
    out: Optional[str] = None
    solution_out: Optional[str] = None
    f_csv: Optional[str] = None
    emit_plot_script: bool = False
    inject_fault: bool = False
    geometry_res: int = Field(400, ge=2)

    @field_validator("lo", "hi", "res", "n_list", mode="before")
    @classmethod
    def split_lists(cls, value):
        return _split(value)

    @model_validator(mode="after")
    def resolve_defaults(self) -> "RunConfig":
        n = self.n
        if self.command is Command.IDENTITIES:
            if any(k not in (2, 3, 4) for k in self.n_list):
                raise ValueError(f"n_list must be drawn from 2..4, got {self.n_list}")
            return self
        if self.geometry is Geometry.EUCLIDEAN:
            raise ValueError("geometry must be hyperbolic or spherical")
        if self.command is not Command.REGION and n > SOLVER_DIM:
            raise ValueError(f"Solver paths support n <= {SOLVER_DIM}, got {n}")
        if self.geometry is Geometry.HYPERBOLIC and n < 2:
            raise ValueError("Hyperbolic geometry needs n >= 2")
        box_given = self.lo is not None and self.hi is not None
        if self.lo is None:
            self.lo = [0.0] * (n - 1) + [1.0] if self.geometry is Geometry.HYPERBOLIC else [-1.0] * n
        if self.hi is None:
            self.hi = [1.0] * (n - 1) + [2.0] if self.geometry is Geometry.HYPERBOLIC else [1.0] * n
        if len(self.res) == 1:
            self.res = self.res * n
        for name in ("lo", "hi", "res"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} needs {n} entries, got {getattr(self, name)}")
        if self.kind is None:
            self.kind = f"{self.geometry.value}_{self.bc.value}"
        if self.kind != CLASSIFY:
            RegionKind(self.kind)
        if self.b_norm < 0:
            raise ValueError(f"b_norm must be >= 0, got {self.b_norm}")
        if self.command is Command.REGION and not box_given:
            derived = self.box_derived()
            if derived:
                raise ValueError(
                    f"region {self.kind} takes {', '.join(derived)} from a box; pass lo and hi or explicit values"
                )
        return self

    def needs_trace_estimate(self) -> bool:
        robin = self.bc is BoundaryCondition.ROBIN or "robin" in (self.kind or "")
        return self.trace_norm == "estimate" and self.b_norm > 0 and robin

    def needs_box_poincare(self) -> bool:
        if self.c_p != "auto":
            return False
        return self.command is not Command.REGION or self.kind == RegionKind.HYPERBOLIC_DIRICHLET_POINCARE.value

    def box_derived(self) -> List[str]:
        """Region parameters that would be computed from the lo/hi box"""
        derived = []
        if self.needs_trace_estimate():
            derived.append("trace_norm=estimate")
        if self.needs_box_poincare() and self.kind != CLASSIFY:
            derived.append("c_p=auto")
        return derived

    @property
    def trial_count(self) -> int:
        return self.trials if self.trials is not None else DEFAULT_TRIALS.get(self.command, 1)

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


class SolveReportModel(BaseModel):
    s0: float
    s1: float
    norm_l2: Optional[float] = None
    norm_d: Optional[float] = None
    rhs_norm_l2: float
    constant: float
    ratio_l2: Optional[float] = None
    ratio_d: Optional[float] = None
    residual: Optional[float] = None
    pivot_min: float
    region_kind: str
    admissible: bool
    bound_family: str
    singular: bool = False
    config: Dict[str, Any] = Field(default_factory=dict)


class ResolventReportModel(BaseModel):
    side: str
    kind: str
    trials: int
    bound: Optional[float] = None
    ratios: List[float] = Field(default_factory=list)
    max_ratio: Optional[float] = None
    max_solve_ratio_l2: Optional[float] = None
    max_solve_ratio_d: Optional[float] = None
    constant: float
    admissible: bool
    bound_family: str
    passed: bool
    config: Dict[str, Any] = Field(default_factory=dict)


class CoercivityReportModel(BaseModel):
    kind: str
    s0: float
    s1: float
    constant: float
    admissible: bool
    bound_family: str
    trials: int
    min_ratio: Optional[float] = None
    min_slack: Optional[float] = None
    violations: int
    continuity_constant: float
    max_continuity_ratio: Optional[float] = None
    params: Dict[str, Any]
    passed: Optional[bool] = None
    config: Dict[str, Any] = Field(default_factory=dict)


class TraceNormReportModel(BaseModel):
    res: List[int]
    estimate: float
    safety: float
    safe_value: float
    config: Dict[str, Any] = Field(default_factory=dict)


class IdentityResult(BaseModel):
    max_residual: float
    passed: bool


class IdentityReportModel(BaseModel):
    n_list: List[int]
    trials: int
    seed: int
    tolerance: float
    inject_fault: bool
    identities: Dict[str, IdentityResult] = Field(default_factory=dict)
    no_drift_max_residual: Optional[float] = None
    no_drift_variant_fails: Optional[bool] = None
    passed: bool
    config: Dict[str, Any] = Field(default_factory=dict)


class GeometryReportModel(BaseModel):
    two_circle: bool
    discriminant: float
    radius_sq_derived: float
    radius_sq_printed: float
    centers: List[Tuple[float, float]]
    hyperbola_center: Optional[float] = None
    axis_threshold: float
    window: float
    grid_res: int
    implication_violations: int
    notes: List[str] = Field(default_factory=list)


class RegionSummaryModel(BaseModel):
    kind: str
    points: int = 0
    admissible_count: int = 0
    admissible_fraction: float = 0.0
    excluded_count: int = 0
    constant_min: Optional[float] = None
    constant_max: Optional[float] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    geometry: Optional[GeometryReportModel] = None
    config: Dict[str, Any] = Field(default_factory=dict)
