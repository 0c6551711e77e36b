"""
Admissible regions of the s-plane and the coercivity constants behind them.

Every kind is reduced to a list of named margins plus a constant; a point is
admissible exactly when all margins are positive (and, for the hyperbolic
Dirichlet problem, |s|^2 stays off beta_n). The constants are evaluated in a
form whose sign matches the margins exactly, so the two never disagree.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import settings
from core.clifford import Paravector
from core.errors import InvalidParamsError, NoBoundError
from core.fields import Geometry
from core.operators import constants
from workers.pool import ordered_map

logger = logging.getLogger(__name__)


class RegionKind(str, Enum):
    HYPERBOLIC_DIRICHLET = "hyperbolic_dirichlet"
    HYPERBOLIC_DIRICHLET_POINCARE = "hyperbolic_dirichlet_poincare"
    HYPERBOLIC_ROBIN = "hyperbolic_robin"
    SPHERICAL_DIRICHLET = "spherical_dirichlet"
    SPHERICAL_ROBIN = "spherical_robin"

    @property
    def geometry(self) -> Geometry:
        return Geometry.HYPERBOLIC if self.value.startswith("hyperbolic") else Geometry.SPHERICAL


class RobinCoeffMode(str, Enum):
    STATEMENT = "statement"
    PROOF = "proof"


@dataclass(frozen=True)
class SPoint:
    """s reduced to (s0, |s_vec|)"""

    s0: float
    s1: float

    def __post_init__(self):
        s0, s1 = float(self.s0), float(self.s1)
        if not (math.isfinite(s0) and math.isfinite(s1)):
            raise InvalidParamsError(f"s must be finite, got ({s0}, {s1})")
        if s1 < 0:
            raise InvalidParamsError(f"s1 is a modulus and must be >= 0, got {s1}")
        object.__setattr__(self, "s0", s0)
        object.__setattr__(self, "s1", s1)

    @classmethod
    def from_paravector(cls, s: Paravector) -> "SPoint":
        return cls(s.s0, s.imaginary_modulus)

    @property
    def modulus_sq(self) -> float:
        return self.s0 * self.s0 + self.s1 * self.s1

    @property
    def modulus(self) -> float:
        return math.sqrt(self.modulus_sq)


@dataclass(frozen=True)
class RegionParams:
    n: int
    m: float
    M: float
    b_norm: float = 0.0
    trace_norm: Optional[float] = None
    c_p: Optional[float] = None
    robin_coeff_mode: RobinCoeffMode = RobinCoeffMode.PROOF

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidParamsError(f"n must be an integer >= 2, got {self.n}")
        m, M = float(self.m), float(self.M)
        if not (math.isfinite(m) and math.isfinite(M)) or not 0 <= m < M:
            raise InvalidParamsError(f"Need 0 <= m < M < inf, got m={m}, M={M}")
        if not math.isfinite(self.b_norm) or self.b_norm < 0:
            raise InvalidParamsError(f"b_norm must be >= 0, got {self.b_norm}")
        for name in ("trace_norm", "c_p"):
            value = getattr(self, name)
            if value is not None and (not math.isfinite(value) or value <= 0):
                raise InvalidParamsError(f"{name} must be positive, got {value}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b_norm", float(self.b_norm))
        object.__setattr__(self, "robin_coeff_mode", RobinCoeffMode(self.robin_coeff_mode))

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["robin_coeff_mode"] = self.robin_coeff_mode.value
        return data


@dataclass(frozen=True)
class Condition:
    name: str
    margin: float


@dataclass(frozen=True)
class RegionVerdict:
    admissible: bool
    constant: float
    conditions: Tuple[Condition, ...]
    excluded: bool = False

    @property
    def margins(self) -> List[float]:
        return [c.margin for c in self.conditions]


# --------------------------------------------------------------------------
# Hyperbolic kinds
# --------------------------------------------------------------------------

def _require_hyperbolic(params: RegionParams) -> None:
    if params.m <= 0:
        raise InvalidParamsError(f"Hyperbolic regions need m > 0, got {params.m}")


def _boundary_load(params: RegionParams, scale: float) -> float:
    """scale * ||b|| * ||tau||^2, zero without a boundary coefficient"""
    if params.b_norm == 0:
        return 0.0
    if params.trace_norm is None:
        raise InvalidParamsError("Robin regions with b_norm > 0 need trace_norm")
    return scale * params.b_norm * params.trace_norm ** 2


def _hyperbolic_terms(params: RegionParams, s: SPoint) -> Tuple[float, float, float]:
    """(||s|^2 - beta| - alpha*root, 2(1+alpha) + sqrt(n)*root, root)"""
    alpha, beta = constants(params.n)
    root = math.sqrt(1.0 + 4.0 * s.s0 * s.s0)
    B = abs(s.modulus_sq - beta) - alpha * root
    C = 2.0 * (1.0 + alpha) + math.sqrt(params.n) * root
    return B, C, root


def lambda_nmb(params: RegionParams, p: float) -> float:
    return p * params.m ** 2 - _boundary_load(params, 2.0 ** (params.n / 2 - 1))


def _hyperbolic_pipeline(params: RegionParams, s: SPoint, load: float) -> Tuple[float, Tuple[Condition, ...]]:
    B, C, _ = _hyperbolic_terms(params, s)
    m2 = params.m ** 2
    MC2 = (params.M * C) ** 2
    X = B + m2 - load
    lam1, lam2 = m2 - load, 2.0 * m2 - load
    second = 2.0 * lam2 * B + lam1 * lam1 - m2 * m2 - MC2
    root = math.sqrt((B - m2) ** 2 + MC2)
    constant = second / (2.0 * (X + root)) if X > 0 else 0.5 * (X - root)
    return constant, (Condition("first", X), Condition("second", second))


def _on_beta_circle(params: RegionParams, s: SPoint) -> bool:
    _, beta = constants(params.n)
    return abs(s.modulus_sq - beta) <= settings.beta_circle_rtol * beta


def hyperbolic_dirichlet(params: RegionParams, s: SPoint) -> RegionVerdict:
    _require_hyperbolic(params)
    constant, conditions = _hyperbolic_pipeline(params, s, 0.0)
    excluded = _on_beta_circle(params, s)
    admissible = all(c.margin > 0 for c in conditions) and not excluded
    return RegionVerdict(admissible, constant, conditions, excluded)


def hyperbolic_dirichlet_poincare(params: RegionParams, s: SPoint) -> RegionVerdict:
    _require_hyperbolic(params)
    if params.c_p is None:
        raise InvalidParamsError("The Poincare variant needs c_p")
    B, C, _ = _hyperbolic_terms(params, s)
    constant = params.m ** 2 - params.c_p * params.M * C - abs(B) * params.c_p ** 2
    return RegionVerdict(constant > 0, constant, (Condition("poincare", constant),))


@lru_cache(maxsize=1)
def _note_extrema_convention() -> bool:
    logger.info("Hyperbolic Robin constants use m, M as extrema of y, not of |x|")
    return True


def robin_load_hyperbolic(params: RegionParams) -> float:
    """Boundary load entering K^R = K - load/2"""
    if params.robin_coeff_mode is RobinCoeffMode.STATEMENT:
        return _boundary_load(params, 2.0 ** (params.n / 2 - 1))
    return _boundary_load(params, 2.0 ** (params.n / 2 + 1))


def hyperbolic_robin(params: RegionParams, s: SPoint) -> RegionVerdict:
    _require_hyperbolic(params)
    _note_extrema_convention()
    constant, conditions = _hyperbolic_pipeline(params, s, robin_load_hyperbolic(params))
    return RegionVerdict(all(c.margin > 0 for c in conditions), constant, conditions)


# --------------------------------------------------------------------------
# Spherical kinds
# --------------------------------------------------------------------------

def _spherical_pipeline(n: int, m: float, M: float, s0, s1, load: float):
    """Margins and constant; works elementwise on numpy arrays"""
    s0 = np.abs(s0)
    P = s0 * s0 + s1 * s1 + n * n - 2.0 * s0 * n * M
    a = (1.0 + m * m) ** 2
    A = math.sqrt(n) * (1.0 + M * M) * ((3.0 + n) * M + s0)
    first = P + a - 2.0 * load
    second = (P - load) * (a - load) - A * A
    root = np.sqrt((P - a) ** 2 + 4.0 * A * A)
    positive = first > 0
    safe = np.where(positive, first + root, 1.0)
    constant = np.where(positive, 2.0 * second / safe, 0.5 * (first - root))
    return first, second, constant


def _spherical_verdict(params: RegionParams, s: SPoint, load: float) -> RegionVerdict:
    first, second, constant = _spherical_pipeline(params.n, params.m, params.M, s.s0, s.s1, load)
    conditions = (Condition("first", float(first)), Condition("second", float(second)))
    return RegionVerdict(all(c.margin > 0 for c in conditions), float(constant), conditions)


def robin_load_spherical(params: RegionParams) -> float:
    return _boundary_load(params, 2.0 ** (params.n / 2))


def spherical_dirichlet(params: RegionParams, s: SPoint) -> RegionVerdict:
    return _spherical_verdict(params, s, 0.0)


def spherical_robin(params: RegionParams, s: SPoint) -> RegionVerdict:
    return _spherical_verdict(params, s, robin_load_spherical(params))


EVALUATORS: Dict[RegionKind, Callable[[RegionParams, SPoint], RegionVerdict]] = {
    RegionKind.HYPERBOLIC_DIRICHLET: hyperbolic_dirichlet,
    RegionKind.HYPERBOLIC_DIRICHLET_POINCARE: hyperbolic_dirichlet_poincare,
    RegionKind.HYPERBOLIC_ROBIN: hyperbolic_robin,
    RegionKind.SPHERICAL_DIRICHLET: spherical_dirichlet,
    RegionKind.SPHERICAL_ROBIN: spherical_robin,
}


def evaluate(kind: RegionKind, params: RegionParams, s: SPoint) -> RegionVerdict:
    return EVALUATORS[RegionKind(kind)](params, s)


# --------------------------------------------------------------------------
# Bounds
# --------------------------------------------------------------------------

def s_resolvent_bound_hyperbolic(params: RegionParams, s: SPoint) -> float:
    return s_resolvent_bound(RegionKind.HYPERBOLIC_DIRICHLET, params, s)


def s_resolvent_bound(kind: RegionKind, params: RegionParams, s: SPoint) -> float:
    """Factor c with ||S_R^{-1}(s) f|| <= c ||f||"""
    kind = RegionKind(kind)
    verdict = evaluate(kind, params, s)
    if not verdict.admissible:
        raise NoBoundError(f"s=({s.s0}, {s.s1}) is not certified for {kind.value}")
    root_n = math.sqrt(params.n)
    if kind is RegionKind.HYPERBOLIC_DIRICHLET_POINCARE:
        alpha, _ = constants(params.n)
        c_p = params.c_p
        return ((s.modulus + alpha) * c_p ** 2 + params.M * root_n * c_p) / verdict.constant
    if kind.geometry is Geometry.HYPERBOLIC:
        alpha, _ = constants(params.n)
        return (s.modulus + alpha + params.M * root_n) / verdict.constant
    return (s.modulus + params.n * params.M + (1.0 + params.M ** 2) * root_n) / verdict.constant


def continuity_constant(geometry: Geometry, params: RegionParams, s: SPoint) -> float:
    """C with |q_s(F,G)| <= C ||F||_H1 ||G||_H1"""
    n, M = params.n, params.M
    scale = 2.0 ** (n / 2)
    root_n = math.sqrt(n)
    if Geometry(geometry) is Geometry.HYPERBOLIC:
        alpha, beta = constants(n)
        root = math.sqrt(1.0 + 4.0 * s.s0 * s.s0)
        return scale * (
            n * M * M + 2.0 * M * (1.0 + alpha) + root_n * M * root + 2.0 * alpha * root + s.modulus_sq + beta
        )
    w = 1.0 + M * M
    return scale * (
        w * w
        + 2.0 * (2 + n) * root_n * M * w
        + 2.0 * root_n * M * w
        + 2.0 * abs(s.s0) * (w * root_n + n * M)
        + s.modulus_sq
        + n * n
    )


def dirac_norm_bound(geometry: Geometry, params: RegionParams, norm_d: float, norm_l2: float) -> float:
    """Upper bound for ||D F||_2 from the H1 pieces of F"""
    root_n = math.sqrt(params.n)
    if Geometry(geometry) is Geometry.HYPERBOLIC:
        alpha, _ = constants(params.n)
        return params.M * root_n * norm_d + alpha * norm_l2
    return (1.0 + params.M ** 2) * root_n * norm_d + params.n * params.M * norm_l2


# --------------------------------------------------------------------------
# Region maps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RegionMap:
    kind: RegionKind
    params: RegionParams
    s0: np.ndarray
    s1: np.ndarray
    admissible: np.ndarray
    constant: np.ndarray
    margins: np.ndarray
    excluded: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        s0, s1 = np.meshgrid(self.s0, self.s1, indexing="ij")
        frame = pd.DataFrame({
            "s0": s0.ravel(),
            "s1": s1.ravel(),
            "admissible": self.admissible.ravel().astype(int),
            "constant": self.constant.ravel(),
        })
        for k in range(self.margins.shape[-1]):
            frame[f"margin_{k + 1}"] = self.margins[..., k].ravel()
        frame["excluded"] = self.excluded.ravel().astype(int)
        return frame

    def summary(self) -> Dict:
        points = int(self.admissible.size)
        count = int(np.count_nonzero(self.admissible))
        constants_ok = self.constant[self.admissible]
        return {
            "kind": self.kind.value,
            "points": points,
            "admissible_count": count,
            "admissible_fraction": count / points,
            "excluded_count": int(np.count_nonzero(self.excluded)),
            "constant_min": float(constants_ok.min()) if count else None,
            "constant_max": float(constants_ok.max()) if count else None,
            "params": self.params.to_dict(),
        }


def _sample_axis(bounds: Sequence[float], count: int, name: str) -> np.ndarray:
    lo, hi = (float(v) for v in bounds)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise InvalidParamsError(f"Empty {name} range [{lo}, {hi}]")
    if count < 2:
        raise InvalidParamsError(f"{name} needs at least 2 samples, got {count}")
    return np.linspace(lo, hi, int(count))


def region_sample(
    kind: RegionKind,
    params: RegionParams,
    s0_range: Sequence[float],
    s1_range: Sequence[float],
    res: Sequence[int],
    max_workers: Optional[int] = None,
) -> RegionMap:
    """Evaluate the verdict on a rectangle of the (s0, s1) plane; s1 may be signed"""
    kind = RegionKind(kind)
    s0_axis = _sample_axis(s0_range, res[0], "s0")
    s1_axis = _sample_axis(s1_range, res[1], "s1")
    evaluator = EVALUATORS[kind]

    def row(s0: float) -> List[RegionVerdict]:
        return [evaluator(params, SPoint(s0, abs(s1))) for s1 in s1_axis]

    rows = ordered_map(row, s0_axis, max_workers)
    width = max(len(v.conditions) for r in rows for v in r)
    admissible = np.array([[v.admissible for v in r] for r in rows], dtype=bool)
    constant = np.array([[v.constant for v in r] for r in rows])
    margins = np.array([[v.margins for v in r] for r in rows]).reshape(len(s0_axis), len(s1_axis), width)
    excluded = np.array([[v.excluded for v in r] for r in rows], dtype=bool)

    if kind is RegionKind.HYPERBOLIC_DIRICHLET:
        _, beta = constants(params.n)
        half_cell = 0.5 * max(s0_axis[1] - s0_axis[0], s1_axis[1] - s1_axis[0])
        s0, s1 = np.meshgrid(s0_axis, s1_axis, indexing="ij")
        excluded |= np.abs(np.hypot(s0, s1) - math.sqrt(beta)) <= half_cell
        admissible &= ~excluded

    logger.info(
        f"[region] {kind.value}: {np.count_nonzero(admissible)}/{admissible.size} admissible points"
    )
    return RegionMap(kind, params, s0_axis, s1_axis, admissible, constant, margins, excluded)


# --------------------------------------------------------------------------
# Spherical geometry
# --------------------------------------------------------------------------

@dataclass
class GeometryReport:
    two_circle: bool
    discriminant: float
    radius_sq_derived: float
    radius_sq_printed: float
    centers: List[Tuple[float, float]]
    hyperbola_center: Optional[float]
    axis_threshold: float
    window: float
    grid_res: int
    implication_violations: int
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return asdict(self)


def classify_spherical_geometry(params: RegionParams, grid_res: int = 400) -> GeometryReport:
    """Two-circle vs whole-plane picture of the spherical region, checked by brute force"""
    n, m, M = params.n, params.m, params.M
    a = (1.0 + m * m) ** 2
    w2 = (1.0 + M * M) ** 2
    disc = n * n * (M * M - 1.0) - a
    notes = []

    denominator = n * w2 - a
    if denominator == 0:
        hyperbola_center = None
        notes.append("degenerate hyperbola: n(1+M^2)^2 = (1+m^2)^2")
    else:
        hyperbola_center = n * M * ((3 + n) * w2 + a) / denominator

    numerator = n * (3 + n) ** 2 * M * M * w2 - n * n * a
    axis_threshold = math.sqrt(numerator / a) if numerator > 0 else 0.0

    radius_sq_printed = n * n * (M * M - 1.0) + a
    notes.append(
        f"circle radius^2 from completing the square: {disc:.12g}; printed value: {radius_sq_printed:.12g}"
    )

    window = 2.0 * (axis_threshold + n * M + abs(hyperbola_center or 0.0)) + 1.0
    axis = np.linspace(-window, window, grid_res)
    s0, s1 = np.meshgrid(axis, np.abs(axis), indexing="ij")
    first, second, _ = _spherical_pipeline(n, m, M, s0, s1, 0.0)
    violations = int(np.count_nonzero((second > 0) & (first <= 0)))
    logger.info(f"[region] spherical geometry: two_circle={disc > 0}, violations={violations}")

    return GeometryReport(
        two_circle=disc > 0,
        discriminant=disc,
        radius_sq_derived=disc,
        radius_sq_printed=radius_sq_printed,
        centers=[(-n * M, 0.0), (n * M, 0.0)],
        hyperbola_center=hyperbola_center,
        axis_threshold=axis_threshold,
        window=window,
        grid_res=grid_res,
        implication_violations=violations,
        notes=notes,
    )
