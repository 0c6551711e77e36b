"""
Conforming multilinear Galerkin discretization of q_s and q_s^R.

Unknowns are nodal R_n values laid out node-major with blades fastest, so a
form term  <c(x) dF, dG>  with a Clifford constant c becomes
kron(scalar_matrix, left_rep_matrix(c)). Row (l, C) of the system is
Sc q_s(F, phi_l e_C); the right-hand side is kron(mass, I) vec(f).
"""
import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix, diags, identity, kron
from scipy.sparse.linalg import eigsh, splu

from config import settings
from core.clifford import SOLVER_DIM, Multivector, Paravector, check_dimension, left_rep_matrix, mul, right_rep_matrix
from core.errors import (
    ConvergenceError,
    GridMismatchError,
    InvalidDomainError,
    InvalidParamsError,
    NoBoundError,
    SingularSystemError,
)
from core.fields import (
    BoxDomain,
    Geometry,
    Grid,
    GridFunction,
    domain_extrema,
    norm_L2,
    poincare_constant_box,
    reference_element,
    seminorm_D,
)
from core.operators import OperatorKind, constants
from core.regions import (
    RegionKind,
    RegionParams,
    RobinCoeffMode,
    SPoint,
    evaluate,
    hyperbolic_dirichlet_poincare,
    s_resolvent_bound,
)

logger = logging.getLogger(__name__)

Weight = Optional[Callable[[np.ndarray], np.ndarray]]
FaceWeights = Union[float, Sequence[float]]


class BoundaryCondition(str, Enum):
    DIRICHLET = "dirichlet"
    ROBIN = "robin"


class ResolventSide(str, Enum):
    LEFT = "left"
    RIGHT = "right"


def _face_weights(b: FaceWeights, n: int) -> np.ndarray:
    """Per-face constants ordered (axis 1 lo, axis 1 hi, axis 2 lo, ...)"""
    weights = np.atleast_1d(np.asarray(b, dtype=float))
    if weights.size == 1:
        weights = np.full(2 * n, weights[0])
    if weights.shape != (2 * n,) or not np.all(np.isfinite(weights)):
        raise InvalidParamsError(f"Robin coefficient needs 1 or {2 * n} finite values, got {b}")
    return weights


@dataclass(frozen=True)
class FormSpec:
    geometry: Geometry
    bc: BoundaryCondition
    s: Paravector
    b: Optional[FaceWeights] = None

    def __post_init__(self):
        geometry = Geometry(self.geometry)
        if geometry is Geometry.EUCLIDEAN:
            raise InvalidParamsError("Forms exist for hyperbolic and spherical geometry only")
        bc = BoundaryCondition(self.bc)
        b = self.b
        if bc is BoundaryCondition.ROBIN:
            if b is None:
                raise InvalidParamsError("Robin forms need a boundary coefficient b")
            b = tuple(float(v) for v in np.atleast_1d(b))
        object.__setattr__(self, "geometry", geometry)
        object.__setattr__(self, "bc", bc)
        object.__setattr__(self, "b", b)

    @property
    def region_kind(self) -> RegionKind:
        return RegionKind(f"{self.geometry.value}_{self.bc.value}")

    @property
    def operator_kind(self) -> OperatorKind:
        if self.geometry is Geometry.HYPERBOLIC:
            return OperatorKind.DIRAC_HYPERBOLIC
        return OperatorKind.DIRAC_SPHERICAL

    @property
    def b_norm(self) -> float:
        return float(np.max(np.abs(self.b))) if self.b else 0.0


# --------------------------------------------------------------------------
# Scalar companions
# --------------------------------------------------------------------------

def _basis(grid: Grid, axis: Optional[int]) -> np.ndarray:
    """(Q, 2^n) shape values, or their derivative along axis"""
    ref = reference_element(grid.n, settings.quadrature_points)
    if axis is None:
        return ref.values
    return ref.grads[:, :, axis] / grid.spacing[axis]


def _assemble_scalar(grid: Grid, weight: Weight = None, trial_axis: Optional[int] = None,
                     test_axis: Optional[int] = None) -> csr_matrix:
    """Entries integral of weight * (d phi_k) * (d phi_l); rows l test, columns k trial"""
    points, q_weights = grid.quadrature
    if weight is None:
        factor = np.broadcast_to(q_weights, points.shape[:2])
    else:
        factor = weight(points) * q_weights
    local = np.einsum("cq,qi,qj->cij", factor, _basis(grid, test_axis), _basis(grid, trial_axis))
    nodes = grid.cell_nodes
    rows = np.broadcast_to(nodes[:, :, None], local.shape)
    cols = np.broadcast_to(nodes[:, None, :], local.shape)
    N = grid.node_count
    return coo_matrix((local.ravel(), (rows.ravel(), cols.ravel())), shape=(N, N)).tocsr()


def scalar_mass_matrix(grid: Grid, weight: Weight = None) -> csr_matrix:
    return _assemble_scalar(grid, weight)


def scalar_stiffness_matrix(grid: Grid, weight: Weight = None) -> csr_matrix:
    total = _assemble_scalar(grid, weight, 0, 0)
    for d in range(1, grid.n):
        total = total + _assemble_scalar(grid, weight, d, d)
    return total


def _mass_1d(cells: int, h: float) -> csr_matrix:
    main = np.full(cells + 1, 2.0 * h / 3.0)
    main[[0, -1]] = h / 3.0
    off = np.full(cells, h / 6.0)
    return diags([off, main, off], [-1, 0, 1], format="csr")


def boundary_mass_matrix(grid: Grid, b: FaceWeights = 1.0) -> csr_matrix:
    """Integral over the boundary of b * phi_k * phi_l, b constant per face"""
    weights = _face_weights(b, grid.n)
    spacing = grid.spacing
    N = grid.node_count
    total = csr_matrix((N, N))
    for d in range(grid.n):
        for side, node in ((0, 0), (1, grid.res[d])):
            w = weights[2 * d + side]
            if w == 0:
                continue
            size = grid.res[d] + 1
            face = csr_matrix(coo_matrix(([1.0], ([node], [node])), shape=(size, size)))
            matrix = None
            for e in range(grid.n):
                factor = face if e == d else _mass_1d(grid.res[e], spacing[e])
                matrix = factor if matrix is None else kron(matrix, factor, format="csr")
            total = total + w * matrix
    return total.tocsr()


# --------------------------------------------------------------------------
# Block forms
# --------------------------------------------------------------------------

def _y(points: np.ndarray) -> np.ndarray:
    return points[..., -1]


def _w(points: np.ndarray) -> np.ndarray:
    return 1.0 + np.sum(points ** 2, axis=-1)


def _check_form_grid(grid: Grid, geometry: Geometry) -> None:
    check_dimension(grid.n, SOLVER_DIM)
    if Geometry(geometry) is Geometry.HYPERBOLIC:
        if grid.n < 2:
            raise InvalidDomainError("Hyperbolic forms need n >= 2")
        if grid.domain.lo[-1] <= 0:
            raise InvalidDomainError(f"Hyperbolic forms need y > 0, got lower bound {grid.domain.lo[-1]}")


def _gen(n: int, i: int) -> Multivector:
    return Multivector.generator(n, i)


def square_form_matrix(grid: Grid, geometry: Geometry) -> csr_matrix:
    """Block matrix of the weak form of T^2"""
    _check_form_grid(grid, geometry)
    n = grid.n
    eye = identity(1 << n, format="csr")
    mass = scalar_mass_matrix(grid)

    if Geometry(geometry) is Geometry.HYPERBOLIC:
        alpha, beta = constants(n)
        scalar = (
            scalar_stiffness_matrix(grid, lambda p: _y(p) ** 2)
            + _assemble_scalar(grid, lambda p: 2.0 * (1.0 + alpha) * _y(p), trial_axis=n - 1)
            + (alpha - beta) * mass
        )
        total = kron(scalar, eye, format="csr")
        e_n = _gen(n, n)
        for i in range(1, n + 1):
            drift = _assemble_scalar(grid, _y, trial_axis=i - 1)
            total = total + kron(drift, left_rep_matrix(mul(e_n, _gen(n, i))), format="csr")
        return total

    scalar = scalar_stiffness_matrix(grid, lambda p: _w(p) ** 2) + float(n * n) * mass
    for i in range(n):
        scalar = scalar + _assemble_scalar(
            grid, lambda p, i=i: 2.0 * (2 + n) * _w(p) * p[..., i], trial_axis=i
        )
    total = kron(scalar, eye, format="csr")
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            term = _assemble_scalar(grid, lambda p, j=j: 2.0 * _w(p) * p[..., j - 1], trial_axis=i - 1)
            total = total + kron(term, left_rep_matrix(mul(_gen(n, j), _gen(n, i))), format="csr")
    return total


def dirac_form_matrix(grid: Grid, geometry: Geometry) -> csr_matrix:
    """Block matrix of <T F, G>"""
    _check_form_grid(grid, geometry)
    n = grid.n
    mass = scalar_mass_matrix(grid)
    if Geometry(geometry) is Geometry.HYPERBOLIC:
        alpha, _ = constants(n)
        total = kron(mass, left_rep_matrix(_gen(n, n) * -alpha), format="csr")
        for i in range(1, n + 1):
            total = total + kron(_assemble_scalar(grid, _y, trial_axis=i - 1), left_rep_matrix(_gen(n, i)), format="csr")
        return total

    total = csr_matrix(((1 << n) * grid.node_count,) * 2)
    for i in range(1, n + 1):
        total = total + kron(_assemble_scalar(grid, _w, trial_axis=i - 1), left_rep_matrix(_gen(n, i)), format="csr")
        position = _assemble_scalar(grid, lambda p, i=i: -float(n) * p[..., i - 1])
        total = total + kron(position, left_rep_matrix(_gen(n, i)), format="csr")
    return total


def _block_rows(nodes: np.ndarray, blades: int) -> np.ndarray:
    return (nodes[:, None] * blades + np.arange(blades)[None, :]).ravel()


@dataclass(frozen=True, eq=False)
class FormOperator:
    """Assembled q_s; matrix acts on all nodes, system on the free ones"""

    grid: Grid
    spec: FormSpec
    matrix: csr_matrix
    system: csr_matrix
    mass: csr_matrix
    stiffness: csr_matrix
    boundary_mass: Optional[csr_matrix]
    free_nodes: np.ndarray

    @property
    def blades(self) -> int:
        return 1 << self.grid.n

    @property
    def block_mass(self) -> csr_matrix:
        return kron(self.mass, identity(self.blades), format="csr")

    def free_rows(self) -> np.ndarray:
        return _block_rows(self.free_nodes, self.blades)

    def expand(self, free_vec: np.ndarray) -> np.ndarray:
        full = np.zeros(self.grid.node_count * self.blades)
        full[self.free_rows()] = free_vec
        return full


def assemble(grid: Grid, spec: FormSpec) -> FormOperator:
    _check_form_grid(grid, spec.geometry)
    if spec.s.n != grid.n:
        raise GridMismatchError(f"s lives in R^{spec.s.n + 1}, grid has n={grid.n}")
    n = grid.n
    mass = scalar_mass_matrix(grid)
    stiffness = scalar_stiffness_matrix(grid)
    eye = identity(1 << n, format="csr")

    matrix = (
        square_form_matrix(grid, spec.geometry)
        - 2.0 * spec.s.s0 * dirac_form_matrix(grid, spec.geometry)
        + spec.s.modulus_sq * kron(mass, eye, format="csr")
    )
    boundary = None
    if spec.bc is BoundaryCondition.ROBIN:
        boundary = boundary_mass_matrix(grid, spec.b)
        matrix = matrix + kron(boundary, eye, format="csr")
        free_nodes = np.arange(grid.node_count)
    else:
        free_nodes = grid.interior_nodes
    matrix = matrix.tocsr()
    rows = _block_rows(free_nodes, 1 << n)
    system = matrix[rows][:, rows].tocsr()
    logger.info(
        f"[assemble] {spec.region_kind.value} on res={grid.res}: {system.shape[0]} unknowns, {system.nnz} nonzeros"
    )
    return FormOperator(grid, spec, matrix, system, mass, stiffness, boundary, free_nodes)


def _check_operands(op: FormOperator, *fields: GridFunction) -> None:
    for F in fields:
        if F.grid != op.grid:
            raise GridMismatchError("Grid function and form live on different grids")


def sc_form_value(op: FormOperator, F: GridFunction, G: GridFunction) -> float:
    """Sc q_s(F, G)"""
    _check_operands(op, F, G)
    return float(G.vec() @ (op.matrix @ F.vec()))


def form_value(op: FormOperator, F: GridFunction, G: GridFunction) -> Multivector:
    """q_s(F, G) rebuilt from its blade coefficients Sc q_s(F, G conj(e_D))"""
    _check_operands(op, F, G)
    n = op.grid.n
    AF = op.matrix @ F.vec()
    coeffs = [float(G.right_mul(Multivector.basis(n, d).conjugate()).vec() @ AF) for d in range(1 << n)]
    return Multivector(n, np.array(coeffs))


@dataclass
class FormBatch:
    """Per-column values for trial vectors stacked as the columns of F and G"""

    sc_diagonal: np.ndarray
    norm_l2_sq: np.ndarray
    seminorm_d_sq: np.ndarray
    cross_norm: np.ndarray
    cross_h1: np.ndarray


def form_batch(op: FormOperator, F: np.ndarray, G: np.ndarray) -> FormBatch:
    """Sc q_s(F,F), |q_s(F,G)| and the Sobolev norms of F, G column by column"""
    blades = op.blades
    rows = op.grid.node_count * blades
    F, G = np.atleast_2d(np.asarray(F, dtype=float)), np.atleast_2d(np.asarray(G, dtype=float))
    if F.shape != G.shape or F.shape[0] != rows:
        raise GridMismatchError(f"Trial blocks need {rows} rows and equal shapes, got {F.shape} and {G.shape}")

    block_stiffness = kron(op.stiffness, identity(blades), format="csr")
    mass = op.block_mass

    def quadratic(matrix: csr_matrix, X: np.ndarray) -> np.ndarray:
        return np.einsum("it,it->t", X, matrix @ X)

    AF = (op.matrix @ F).reshape(op.grid.node_count, blades, -1)
    G_nodes = G.reshape(op.grid.node_count, blades, -1)
    coeffs = np.empty((blades, F.shape[1]))
    for d in range(blades):
        rep = right_rep_matrix(Multivector.basis(op.grid.n, d).conjugate())
        coeffs[d] = np.einsum("ab,nbt,nat->t", rep, G_nodes, AF, optimize=True)

    l2_F, d_F = quadratic(mass, F), quadratic(block_stiffness, F)
    l2_G, d_G = quadratic(mass, G), quadratic(block_stiffness, G)
    return FormBatch(
        sc_diagonal=np.einsum("nat,nat->t", F.reshape(AF.shape), AF),
        norm_l2_sq=l2_F,
        seminorm_d_sq=d_F,
        cross_norm=np.sqrt(np.einsum("dt,dt->t", coeffs, coeffs)),
        cross_h1=np.sqrt((l2_F + d_F) * (l2_G + d_G)),
    )


# --------------------------------------------------------------------------
# Solves
# --------------------------------------------------------------------------

@dataclass
class SolveReport:
    s0: float
    s1: float
    norm_l2: Optional[float]
    norm_d: Optional[float]
    rhs_norm_l2: float
    constant: float
    ratio_l2: Optional[float]
    ratio_d: Optional[float]
    residual: Optional[float]
    pivot_min: float
    region_kind: str
    admissible: bool
    bound_family: str
    singular: bool = False

    def to_dict(self) -> Dict:
        return asdict(self)

    def within_bounds(self, tolerance: Optional[float] = None) -> bool:
        """True when no certified bound is violated"""
        if not self.admissible or self.singular:
            return True
        tolerance = settings.bound_tolerance if tolerance is None else tolerance
        return self.ratio_l2 <= 1.0 + tolerance and self.ratio_d <= 1.0 + tolerance


def default_region_params(
    grid: Grid,
    spec: FormSpec,
    trace_norm: Optional[float] = None,
    trace_safety: float = 2.0,
    c_p: Optional[float] = None,
    robin_coeff_mode: RobinCoeffMode = RobinCoeffMode.PROOF,
) -> RegionParams:
    """m, M and C_P from the box; the trace norm is estimated only when Robin needs one"""
    domain = BoxDomain(grid.domain.lo, grid.domain.hi, spec.geometry)
    m, M = domain_extrema(domain)
    if spec.bc is BoundaryCondition.ROBIN and spec.b_norm > 0 and trace_norm is None:
        trace_norm = trace_safety * estimate_trace_norm(grid)
        logger.warning(f"[solve] trace_norm not given; using {trace_safety} x discrete estimate = {trace_norm:.6g}")
    return RegionParams(
        n=grid.n,
        m=m,
        M=M,
        b_norm=spec.b_norm,
        trace_norm=trace_norm,
        c_p=c_p if c_p is not None else poincare_constant_box(domain),
        robin_coeff_mode=robin_coeff_mode,
    )


def bound_family(kind: RegionKind, params: RegionParams, s: SPoint) -> Tuple[RegionKind, float, bool, str]:
    verdict = evaluate(kind, params, s)
    if verdict.admissible:
        return kind, verdict.constant, True, "coercivity"
    if kind is RegionKind.HYPERBOLIC_DIRICHLET and params.c_p is not None:
        poincare = hyperbolic_dirichlet_poincare(params, s)
        if poincare.admissible:
            return RegionKind.HYPERBOLIC_DIRICHLET_POINCARE, poincare.constant, True, "poincare"
    return kind, verdict.constant, False, "none"


def solve_weak(op: FormOperator, f: GridFunction, params: Optional[RegionParams] = None) -> Tuple[GridFunction, SolveReport]:
    """Discrete Lax-Milgram solve of q_s(F, G) = <f, G> for all discrete G"""
    _check_operands(op, f)
    params = params or default_region_params(op.grid, op.spec)
    s = SPoint.from_paravector(op.spec.s)
    kind, constant, admissible, family = bound_family(op.spec.region_kind, params, s)
    rhs_norm = norm_L2(f)

    def report(**values) -> SolveReport:
        base = dict(
            s0=s.s0, s1=s.s1, norm_l2=None, norm_d=None, rhs_norm_l2=rhs_norm, constant=constant,
            ratio_l2=None, ratio_d=None, residual=None, pivot_min=0.0, region_kind=kind.value,
            admissible=admissible, bound_family=family,
        )
        base.update(values)
        return SolveReport(**base)

    rows = op.free_rows()
    rhs = (op.block_mass @ f.vec())[rows]
    try:
        lu = splu(op.system.tocsc(), permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SingularSystemError(
            f"Factorization failed at s=({s.s0}, {s.s1}); possible S-spectrum proximity: {exc}",
            0.0,
            report(singular=True),
        ) from exc

    pivots = np.abs(lu.U.diagonal())
    pivot_min = float(pivots.min() / pivots.max()) if pivots.max() > 0 else 0.0
    if pivot_min < settings.pivot_tolerance:
        raise SingularSystemError(
            f"Pivot ratio {pivot_min:.3e} at s=({s.s0}, {s.s1}); possible S-spectrum proximity",
            pivot_min,
            report(pivot_min=pivot_min, singular=True),
        )

    x = lu.solve(rhs)
    rhs_size = np.linalg.norm(rhs)
    residual = float(np.linalg.norm(op.system @ x - rhs) / (rhs_size if rhs_size > 0 else 1.0))
    F = GridFunction.from_vector(op.grid, op.expand(x))
    norm_l2, norm_d = norm_L2(F), seminorm_D(F)

    if rhs_norm == 0:
        ratio_l2 = ratio_d = 0.0
    elif family == "poincare":
        ratio_l2 = norm_l2 * constant / (params.c_p ** 2 * rhs_norm)
        ratio_d = norm_d * constant / (params.c_p * rhs_norm)
    else:
        ratio_l2 = norm_l2 * constant / rhs_norm
        ratio_d = norm_d * constant / rhs_norm

    result = report(
        norm_l2=norm_l2, norm_d=norm_d, ratio_l2=ratio_l2, ratio_d=ratio_d,
        residual=residual, pivot_min=pivot_min,
    )
    logger.info(
        f"[solve] {kind.value} s=({s.s0}, {s.s1}): ratio_l2={ratio_l2:.6g}, ratio_d={ratio_d:.6g}, "
        f"residual={residual:.3e}, family={family}"
    )
    return F, result


def estimate_trace_norm(grid: Grid, max_iterations: Optional[int] = None, tolerance: Optional[float] = None) -> float:
    """sqrt of the top eigenvalue of B v = lambda (M + K) v; a lower bound of ||tau_D||"""
    max_iterations = max_iterations or settings.trace_max_iterations
    tolerance = tolerance or settings.trace_tolerance
    A = (scalar_mass_matrix(grid) + scalar_stiffness_matrix(grid)).tocsc()
    B = boundary_mass_matrix(grid, 1.0)
    lu = splu(A)

    v = np.ones(grid.node_count)
    v /= math.sqrt(v @ (A @ v))
    value = float(v @ (B @ v))
    for iteration in range(1, max_iterations + 1):
        w = lu.solve(B @ v)
        w /= math.sqrt(w @ (A @ w))
        updated = float(w @ (B @ w))
        v = w
        if abs(updated - value) <= tolerance * updated:
            logger.info(f"[trace] res={grid.res}: converged after {iteration} iterations, estimate {math.sqrt(updated):.8g}")
            return math.sqrt(updated)
        value = updated
    raise ConvergenceError(
        f"Trace-norm iteration did not converge in {max_iterations} steps",
        last_iterate=math.sqrt(value),
        iterations=max_iterations,
    )


def dirichlet_laplacian_min_eigenvalue(grid: Grid) -> float:
    interior = grid.interior_nodes
    K = scalar_stiffness_matrix(grid)[interior][:, interior].tocsc()
    M = scalar_mass_matrix(grid)[interior][:, interior].tocsc()
    values = eigsh(K, k=1, M=M, sigma=0.0, which="LM", v0=np.ones(len(interior)), return_eigenvectors=False)
    return float(values[0])


# --------------------------------------------------------------------------
# Discrete Dirac operators and S-resolvents
# --------------------------------------------------------------------------

def apply_discrete_dirac(kind: OperatorKind, F: GridFunction) -> GridFunction:
    """Second-order finite differences plus the exact zero-order Clifford terms"""
    kind = OperatorKind(kind)
    grid = F.grid
    n = grid.n
    blades = 1 << n
    table = F.values.reshape(grid.shape + (blades,))
    grads = [
        np.gradient(table, h, axis=d, edge_order=2).reshape(-1, blades)
        for d, h in enumerate(grid.spacing)
    ]
    x = grid.nodes
    reps = [left_rep_matrix(_gen(n, i)).T for i in range(1, n + 1)]

    if kind is OperatorKind.DIRAC_HYPERBOLIC:
        alpha, _ = constants(n)
        out = sum(grads[i] @ reps[i] for i in range(n)) * x[:, -1:]
        out = out - alpha * (F.values @ reps[n - 1])
    elif kind is OperatorKind.DIRAC_SPHERICAL:
        weight = 1.0 + np.sum(x ** 2, axis=1, keepdims=True)
        out = weight * sum(grads[i] @ reps[i] for i in range(n))
        out = out - float(n) * sum(x[:, j:j + 1] * (F.values @ reps[j]) for j in range(n))
    else:
        raise InvalidParamsError(f"No discrete application for {kind.value}")
    return GridFunction(grid, out)


@dataclass
class ResolventReport:
    side: str
    kind: str
    norm_l2: float
    rhs_norm_l2: float
    bound: Optional[float]
    ratio: Optional[float]
    solve: SolveReport

    def to_dict(self) -> Dict:
        return asdict(self)

    def within_bound(self, slack: Optional[float] = None) -> bool:
        if self.ratio is None:
            return True
        slack = settings.resolvent_slack if slack is None else slack
        return self.ratio <= 1.0 + slack


def s_resolvent_apply(
    side: ResolventSide,
    kind: OperatorKind,
    spec: FormSpec,
    f: GridFunction,
    op: Optional[FormOperator] = None,
    params: Optional[RegionParams] = None,
) -> Tuple[GridFunction, ResolventReport]:
    """right: (s_bar - D) Q_s^{-1} f; left: Q_s^{-1} f s_bar - D Q_s^{-1} f"""
    side = ResolventSide(side)
    kind = OperatorKind(kind)
    if kind is not spec.operator_kind:
        raise InvalidParamsError(f"{kind.value} does not match a {spec.geometry.value} form")
    op = op or assemble(f.grid, spec)
    params = params or default_region_params(f.grid, spec)
    F, solve_report = solve_weak(op, f, params)

    s_bar = spec.s.conjugate().to_multivector()
    shifted = F.left_mul(s_bar) if side is ResolventSide.RIGHT else F.right_mul(s_bar)
    result = shifted - apply_discrete_dirac(kind, F)
    norm_result = norm_L2(result)

    s = SPoint.from_paravector(spec.s)
    try:
        bound = s_resolvent_bound(RegionKind(solve_report.region_kind), params, s)
        ratio = norm_result / (bound * solve_report.rhs_norm_l2) if solve_report.rhs_norm_l2 > 0 else 0.0
    except NoBoundError:
        bound = ratio = None

    report = ResolventReport(side.value, kind.value, norm_result, solve_report.rhs_norm_l2, bound, ratio, solve_report)
    logger.info(f"[resolvent] {side.value} side at s=({s.s0}, {s.s1}): ratio={ratio}")
    return result, report
