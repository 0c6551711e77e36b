"""
Function spaces over boxes.

PolyField is the exact carrier used to verify operator identities; GridFunction
holds nodal multilinear data for the Galerkin solver. Inner products use tensor
Gauss-Legendre quadrature per cell, exact for the polynomial weights that occur
in the forms.
"""
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.interpolate import RegularGridInterpolator
from scipy.special import roots_legendre

from config import settings
from core.clifford import (
    Multivector,
    check_dimension,
    conjugation_signs,
    left_rep_matrix,
    mul_batched,
    right_rep_matrix,
)
from core.errors import (
    DegreeOverflowError,
    GridMismatchError,
    InvalidDimensionError,
    InvalidDomainError,
)

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]
Coefficient = Union[Multivector, np.ndarray, Sequence[float]]


class Geometry(str, Enum):
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"
    SPHERICAL = "spherical"


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box; in hyperbolic geometry the last coordinate is y > 0"""

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]
    geometry: Geometry = Geometry.EUCLIDEAN

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise InvalidDomainError(f"Box bounds must have equal nonzero length: {lo} vs {hi}")
        check_dimension(len(lo))
        if not np.all(np.isfinite(lo + hi)):
            raise InvalidDomainError("Box bounds must be finite")
        if any(a >= b for a, b in zip(lo, hi)):
            raise InvalidDomainError(f"Box needs lo < hi on every axis: {lo}, {hi}")
        geometry = Geometry(self.geometry)
        if geometry is Geometry.HYPERBOLIC:
            if len(lo) < 2:
                raise InvalidDomainError("Hyperbolic boxes need n >= 2")
            if lo[-1] <= 0:
                raise InvalidDomainError(f"Hyperbolic boxes need y > 0, got lower bound {lo[-1]}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "geometry", geometry)

    @property
    def n_space(self) -> int:
        return len(self.lo)

    @property
    def lengths(self) -> np.ndarray:
        return np.array(self.hi) - np.array(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))


def domain_extrema(d: BoxDomain) -> Tuple[float, float]:
    """(m, M): extrema of y for hyperbolic boxes, of |x| over the closed box otherwise"""
    lo = np.array(d.lo)
    hi = np.array(d.hi)
    far = float(np.sqrt(np.sum(np.maximum(lo ** 2, hi ** 2))))
    if d.geometry is Geometry.HYPERBOLIC:
        if lo[-1] <= 0:
            raise InvalidDomainError("Hyperbolic boxes need y > 0")
        return float(lo[-1]), float(hi[-1])
    if d.geometry is Geometry.SPHERICAL:
        near = float(np.linalg.norm(np.clip(0.0, lo, hi)))
        return near, far
    return 0.0, far


def poincare_constant_box(d: BoxDomain) -> float:
    return float(np.sum((np.pi / d.lengths) ** 2) ** -0.5)


# --------------------------------------------------------------------------
# Exact polynomial fields
# --------------------------------------------------------------------------

def _coefficient_array(coeff: Coefficient, size: int) -> np.ndarray:
    arr = np.array(coeff.coeffs if isinstance(coeff, Multivector) else coeff, dtype=float)
    if arr.shape != (size,):
        raise InvalidDimensionError(f"Coefficient needs {size} entries, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class PolyField:
    """Polynomial in x_1..x_n with R_n coefficients, stored without zero terms"""

    n: int
    terms: Mapping[Exponent, np.ndarray]

    def __post_init__(self):
        n = check_dimension(self.n)
        size = 1 << n
        merged: Dict[Exponent, np.ndarray] = {}
        for exponent, coeff in self.terms.items():
            exponent = tuple(int(k) for k in exponent)
            if len(exponent) != n or min(exponent) < 0:
                raise InvalidDimensionError(f"Exponent {exponent} invalid for n={n}")
            arr = _coefficient_array(coeff, size)
            merged[exponent] = merged[exponent] + arr if exponent in merged else arr
        cleaned = {}
        for exponent in sorted(merged):
            arr = merged[exponent]
            if np.any(arr):
                arr.setflags(write=False)
                cleaned[exponent] = arr
        if cleaned:
            degree = max(sum(e) for e in cleaned)
            if degree > settings.poly_degree_cap:
                raise DegreeOverflowError(
                    f"Degree {degree} exceeds the cap {settings.poly_degree_cap}"
                )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", cleaned)

    @classmethod
    def zero(cls, n: int) -> "PolyField":
        return cls(n, {})

    @classmethod
    def monomial(cls, n: int, exponent: Sequence[int], coeff: Union[Coefficient, float] = 1.0) -> "PolyField":
        if isinstance(coeff, (int, float, np.floating)):
            coeff = Multivector.scalar(n, float(coeff))
        return cls(n, {tuple(exponent): coeff})

    @classmethod
    def constant(cls, n: int, coeff: Union[Coefficient, float]) -> "PolyField":
        return cls.monomial(n, (0,) * n, coeff)

    @classmethod
    def coordinate(cls, n: int, axis: int, coeff: Union[Coefficient, float] = 1.0) -> "PolyField":
        """x_axis * coeff, axis counted from 1"""
        if not 1 <= axis <= n:
            raise InvalidDimensionError(f"Axis {axis} outside 1..{n}")
        exponent = [0] * n
        exponent[axis - 1] = 1
        return cls.monomial(n, exponent, coeff)

    @classmethod
    def paravector_field(cls, n: int) -> "PolyField":
        """x = sum x_i e_i"""
        terms = {}
        for i in range(1, n + 1):
            exponent = [0] * n
            exponent[i - 1] = 1
            terms[tuple(exponent)] = Multivector.generator(n, i)
        return cls(n, terms)

    @classmethod
    def radial_weight(cls, n: int) -> "PolyField":
        """1 + |x|^2 as a scalar polynomial"""
        terms = {(0,) * n: Multivector.scalar(n, 1.0)}
        for i in range(n):
            exponent = [0] * n
            exponent[i] = 2
            terms[tuple(exponent)] = Multivector.scalar(n, 1.0)
        return cls(n, terms)

    @classmethod
    def random(
        cls,
        n: int,
        degree: int,
        rng: np.random.Generator,
        density: float = 1.0,
        homogeneous: bool = False,
    ) -> "PolyField":
        """Random coefficients uniform in [-1, 1] on a random subset of monomials"""
        size = 1 << check_dimension(n)
        terms = {}
        for exponent in itertools.product(range(degree + 1), repeat=n):
            total = sum(exponent)
            if total > degree or (homogeneous and total != degree):
                continue
            if density < 1.0 and rng.random() >= density:
                continue
            terms[exponent] = rng.uniform(-1.0, 1.0, size)
        return cls(n, terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def max_abs_coeff(self) -> float:
        return max((float(np.max(np.abs(a))) for a in self.terms.values()), default=0.0)

    def coefficient(self, exponent: Sequence[int]) -> Multivector:
        arr = self.terms.get(tuple(exponent))
        return Multivector(self.n, arr) if arr is not None else Multivector.zero(self.n)

    def items(self) -> Iterator[Tuple[Exponent, Multivector]]:
        for exponent, arr in self.terms.items():
            yield exponent, Multivector(self.n, arr)

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        if isinstance(other, PolyField):
            return poly_add(self, other)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, PolyField):
            return poly_add(self, poly_scale(other, -1.0))
        return NotImplemented

    def __neg__(self):
        return poly_scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, PolyField):
            return poly_mul(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return poly_scale(self, float(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Multivector):
            return poly_left_mul(other, self)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return poly_scale(self, float(other))
        return NotImplemented

    def __repr__(self):
        return f"PolyField(n={self.n}, terms={len(self.terms)}, degree={self.degree})"


def _check_same_dimension(F: PolyField, G: PolyField) -> None:
    if F.n != G.n:
        raise GridMismatchError(f"Polynomial dimension mismatch: {F.n} vs {G.n}")


def _accumulate(n: int, pairs) -> PolyField:
    acc: Dict[Exponent, np.ndarray] = {}
    for exponent, arr in pairs:
        if exponent in acc:
            acc[exponent] = acc[exponent] + arr
        else:
            acc[exponent] = np.array(arr, dtype=float)
    return PolyField(n, acc)


def poly_add(F: PolyField, G: PolyField) -> PolyField:
    _check_same_dimension(F, G)
    return _accumulate(F.n, itertools.chain(F.terms.items(), G.terms.items()))


def poly_scale(F: PolyField, k: float) -> PolyField:
    return PolyField(F.n, {e: a * k for e, a in F.terms.items()})


def poly_derive(F: PolyField, axis: int) -> PolyField:
    """Formal partial derivative in x_axis, axis counted from 1"""
    if not 1 <= axis <= F.n:
        raise InvalidDimensionError(f"Axis {axis} outside 1..{F.n}")
    i = axis - 1
    terms = {}
    for exponent, arr in F.terms.items():
        k = exponent[i]
        if k == 0:
            continue
        lowered = exponent[:i] + (k - 1,) + exponent[i + 1:]
        terms[lowered] = arr * k
    return PolyField(F.n, terms)


def poly_coord_mul(F: PolyField, monomial: Sequence[int]) -> PolyField:
    monomial = tuple(int(k) for k in monomial)
    if len(monomial) != F.n or min(monomial) < 0:
        raise InvalidDimensionError(f"Monomial {monomial} invalid for n={F.n}")
    return PolyField(F.n, {tuple(a + b for a, b in zip(e, monomial)): arr for e, arr in F.terms.items()})


def _apply_rep(F: PolyField, rep: np.ndarray) -> PolyField:
    if not F.terms:
        return F
    exponents = list(F.terms)
    stacked = np.stack([F.terms[e] for e in exponents]) @ rep.T
    return PolyField(F.n, dict(zip(exponents, stacked)))


def poly_left_mul(c: Multivector, F: PolyField) -> PolyField:
    if c.n != F.n:
        raise GridMismatchError(f"Dimension mismatch: R_{c.n} vs n={F.n}")
    return _apply_rep(F, left_rep_matrix(c))


def poly_right_mul(F: PolyField, c: Multivector) -> PolyField:
    if c.n != F.n:
        raise GridMismatchError(f"Dimension mismatch: R_{c.n} vs n={F.n}")
    return _apply_rep(F, right_rep_matrix(c))


def poly_mul(P: PolyField, F: PolyField) -> PolyField:
    """Product P*F with P's coefficients multiplying from the left"""
    _check_same_dimension(P, F)
    if not P.terms or not F.terms:
        return PolyField.zero(F.n)
    exponents = list(F.terms)
    stacked = np.stack([F.terms[e] for e in exponents])
    pairs = []
    for p_exponent, p_coeff in P.terms.items():
        products = stacked @ left_rep_matrix(Multivector(F.n, p_coeff)).T
        for f_exponent, row in zip(exponents, products):
            pairs.append((tuple(a + b for a, b in zip(p_exponent, f_exponent)), row))
    return _accumulate(F.n, pairs)


def poly_conjugate(F: PolyField) -> PolyField:
    signs = conjugation_signs(F.n)
    return PolyField(F.n, {e: a * signs for e, a in F.terms.items()})


def poly_evaluate_many(F: PolyField, points: np.ndarray) -> np.ndarray:
    """Values at an (N, n) array of points, shaped (N, 2^n)"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != F.n:
        raise GridMismatchError(f"Points have {points.shape[1]} coordinates, field has n={F.n}")
    out = np.zeros((points.shape[0], 1 << F.n))
    for exponent, arr in F.terms.items():
        weight = np.prod(points ** np.array(exponent), axis=1)
        out += weight[:, None] * arr[None, :]
    return out


def poly_evaluate(F: PolyField, point: Sequence[float]) -> Multivector:
    return Multivector(F.n, poly_evaluate_many(F, np.asarray(point, dtype=float)[None, :])[0])


def poly_integrate_box(F: PolyField, domain: BoxDomain) -> Multivector:
    """Exact integral of F over the box"""
    if domain.n_space != F.n:
        raise GridMismatchError(f"Box dimension {domain.n_space} vs field n={F.n}")
    lo = np.array(domain.lo)
    hi = np.array(domain.hi)
    total = np.zeros(1 << F.n)
    for exponent, arr in F.terms.items():
        k = np.array(exponent, dtype=float)
        total += arr * np.prod((hi ** (k + 1) - lo ** (k + 1)) / (k + 1))
    return Multivector(F.n, total)


# --------------------------------------------------------------------------
# Grids and the multilinear reference element
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceElement:
    offsets: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    grads: np.ndarray


@lru_cache(maxsize=16)
def reference_element(n: int, points: int = 4) -> ReferenceElement:
    """Multilinear shape functions on [0,1]^n sampled at tensor Gauss points"""
    nodes, weights = roots_legendre(points)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    offsets = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)
    q_index = np.array(list(itertools.product(range(points), repeat=n)), dtype=np.int64)
    q_points = nodes[q_index]
    q_weights = np.prod(weights[q_index], axis=1)

    corner = offsets[None, :, :] == 1
    phi = np.where(corner, q_points[:, None, :], 1.0 - q_points[:, None, :])
    dphi = np.where(corner, 1.0, -1.0) * np.ones_like(phi)
    values = np.prod(phi, axis=2)
    grads = np.empty(phi.shape)
    for d in range(n):
        grads[:, :, d] = dphi[:, :, d] * np.prod(np.delete(phi, d, axis=2), axis=2)
    for arr in (offsets, q_points, q_weights, values, grads):
        arr.setflags(write=False)
    return ReferenceElement(offsets, q_points, q_weights, values, grads)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Tensor-product grid; nodes ordered lexicographically, last axis fastest"""

    domain: BoxDomain
    res: Tuple[int, ...]

    def __post_init__(self):
        res = tuple(int(r) for r in self.res)
        if len(res) != self.domain.n_space:
            raise InvalidDomainError(f"Need {self.domain.n_space} cell counts, got {len(res)}")
        if any(r < 2 for r in res):
            raise InvalidDomainError(f"Every axis needs at least 2 cells, got {res}")
        object.__setattr__(self, "res", res)

    @property
    def n(self) -> int:
        return self.domain.n_space

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(r + 1 for r in self.res)

    @property
    def node_count(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.res))

    @property
    def spacing(self) -> np.ndarray:
        return self.domain.lengths / np.array(self.res)

    @property
    def axes(self) -> List[np.ndarray]:
        return [np.linspace(a, b, r + 1) for a, b, r in zip(self.domain.lo, self.domain.hi, self.res)]

    @cached_property
    def multi_index(self) -> np.ndarray:
        return _readonly(np.indices(self.shape).reshape(self.n, -1).T.copy())

    @cached_property
    def nodes(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return _readonly(np.stack([m.ravel() for m in mesh], axis=1))

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        idx = self.multi_index
        mask = np.any((idx == 0) | (idx == np.array(self.res)), axis=1)
        return _readonly(mask)

    @property
    def interior_nodes(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask)

    @cached_property
    def cell_nodes(self) -> np.ndarray:
        """(cells, 2^n) global node indices, corners in reference-element order"""
        ref = reference_element(self.n, settings.quadrature_points)
        cells = np.indices(self.res).reshape(self.n, -1).T
        corners = cells[:, None, :] + ref.offsets[None, :, :]
        flat = np.ravel_multi_index(tuple(corners[..., d] for d in range(self.n)), self.shape)
        return _readonly(flat)

    @cached_property
    def quadrature(self) -> Tuple[np.ndarray, np.ndarray]:
        """Physical quadrature points (cells, Q, n) and weights (Q,) including the Jacobian"""
        ref = reference_element(self.n, settings.quadrature_points)
        h = self.spacing
        cells = np.indices(self.res).reshape(self.n, -1).T
        origin = np.array(self.domain.lo) + cells * h
        points = origin[:, None, :] + ref.points[None, :, :] * h
        weights = ref.weights * float(np.prod(h))
        return _readonly(points), _readonly(weights)


# --------------------------------------------------------------------------
# Grid functions
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nodal R_n values, shape (nodes, 2^n)"""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        expected = (self.grid.node_count, 1 << self.grid.n)
        if values.shape != expected:
            raise GridMismatchError(f"Grid function needs shape {expected}, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros((grid.node_count, 1 << grid.n)))

    @classmethod
    def constant(cls, grid: Grid, c: Multivector) -> "GridFunction":
        if c.n != grid.n:
            raise GridMismatchError(f"Constant in R_{c.n} on an n={grid.n} grid")
        return cls(grid, np.tile(c.coeffs, (grid.node_count, 1)))

    @classmethod
    def random(cls, grid: Grid, rng: np.random.Generator, constrained: bool = False) -> "GridFunction":
        values = rng.uniform(-1.0, 1.0, (grid.node_count, 1 << grid.n))
        if constrained:
            values[grid.boundary_mask] = 0.0
        return cls(grid, values)

    @classmethod
    def from_vector(cls, grid: Grid, vec: np.ndarray) -> "GridFunction":
        return cls(grid, np.asarray(vec, dtype=float).reshape(grid.node_count, 1 << grid.n))

    @property
    def n(self) -> int:
        return self.grid.n

    def vec(self) -> np.ndarray:
        """Node-major, blade-fastest flattening"""
        return self.values.ravel().copy()

    def nodal(self, node: int) -> Multivector:
        return Multivector(self.n, self.values[node])

    def constrained(self) -> "GridFunction":
        values = np.array(self.values)
        values[self.grid.boundary_mask] = 0.0
        return GridFunction(self.grid, values)

    def is_constrained(self) -> bool:
        return not np.any(self.values[self.grid.boundary_mask])

    def left_mul(self, c: Multivector) -> "GridFunction":
        return GridFunction(self.grid, self.values @ left_rep_matrix(c).T)

    def right_mul(self, c: Multivector) -> "GridFunction":
        return GridFunction(self.grid, self.values @ right_rep_matrix(c).T)

    def _check_grid(self, other: "GridFunction") -> None:
        if other.grid != self.grid:
            raise GridMismatchError("Grid functions live on different grids")

    def __add__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        self._check_grid(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        self._check_grid(other)
        return GridFunction(self.grid, self.values - other.values)

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return GridFunction(self.grid, self.values * float(other))
        return NotImplemented

    __rmul__ = __mul__

    def at_quadrature(self) -> np.ndarray:
        """Interpolant values at the quadrature points, shape (cells, Q, 2^n)"""
        ref = reference_element(self.n, settings.quadrature_points)
        local = self.values[self.grid.cell_nodes]
        return np.einsum("ql,clb->cqb", ref.values, local)

    def gradient_at_quadrature(self) -> np.ndarray:
        """Exact interpolant gradients, shape (cells, Q, n, 2^n)"""
        ref = reference_element(self.n, settings.quadrature_points)
        local = self.values[self.grid.cell_nodes]
        grads = ref.grads / self.grid.spacing[None, None, :]
        return np.einsum("qld,clb->cqdb", grads, local)

    def evaluate_at(self, points: np.ndarray) -> np.ndarray:
        """Multilinear interpolation at arbitrary points inside the box, shape (P, 2^n)"""
        table = self.values.reshape(self.grid.shape + (1 << self.n,))
        interpolator = RegularGridInterpolator(self.grid.axes, table, method="linear")
        return interpolator(np.atleast_2d(points))


def _check_same_grid(F: GridFunction, G: GridFunction) -> None:
    if F.grid != G.grid:
        raise GridMismatchError("Grid functions live on different grids")


def inner_product_L2(F: GridFunction, G: GridFunction) -> Multivector:
    """<F, G> = integral of conj(F) G, R_n-valued"""
    _check_same_grid(F, G)
    _, weights = F.grid.quadrature
    left = F.at_quadrature() * conjugation_signs(F.n)
    integrand = mul_batched(left, G.at_quadrature(), F.n)
    per_cell = np.einsum("cqb,q->cb", integrand, weights)
    return Multivector(F.n, np.sum(per_cell, axis=0))


def norm_L2(F: GridFunction) -> float:
    return float(np.sqrt(max(inner_product_L2(F, F).scalar_part(), 0.0)))


def seminorm_D(F: GridFunction) -> float:
    _, weights = F.grid.quadrature
    grads = F.gradient_at_quadrature()
    per_cell = np.einsum("cqdb,cqdb,q->c", grads, grads, weights)
    return float(np.sqrt(np.sum(per_cell)))


def norm_H1(F: GridFunction) -> float:
    return float(np.hypot(norm_L2(F), seminorm_D(F)))


def sample_poly_to_grid(F: PolyField, g: Grid) -> GridFunction:
    if F.n != g.n:
        raise GridMismatchError(f"Field n={F.n} on a grid of dimension {g.n}")
    return GridFunction(g, poly_evaluate_many(F, g.nodes))


# --------------------------------------------------------------------------
# Nodal CSV
# --------------------------------------------------------------------------

def index_columns(n: int) -> List[str]:
    return [f"i{d + 1}" for d in range(n)]


def grid_function_to_frame(F: GridFunction) -> pd.DataFrame:
    blades = 1 << F.n
    idx = np.repeat(F.grid.multi_index, blades, axis=0)
    frame = pd.DataFrame(idx, columns=index_columns(F.n))
    frame["blade_mask"] = np.tile(np.arange(blades), F.grid.node_count)
    frame["value"] = F.values.ravel()
    return frame


def grid_function_from_frame(grid: Grid, frame: pd.DataFrame) -> GridFunction:
    columns = index_columns(grid.n) + ["blade_mask", "value"]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise GridMismatchError(f"Nodal CSV lacks columns {missing}")
    idx = frame[index_columns(grid.n)].to_numpy(dtype=np.int64)
    blades = frame["blade_mask"].to_numpy(dtype=np.int64)
    if np.any(idx < 0) or np.any(idx >= np.array(grid.shape)) or np.any(blades < 0) or np.any(blades >= 1 << grid.n):
        raise GridMismatchError("Nodal CSV indices fall outside the grid")
    nodes = np.ravel_multi_index(tuple(idx.T), grid.shape)
    values = np.zeros((grid.node_count, 1 << grid.n))
    values[nodes, blades] = frame["value"].to_numpy(dtype=float)
    return GridFunction(grid, values)
