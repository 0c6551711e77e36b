"""
Clifford algebra R_n with generators e_1..e_n, e_i^2 = -1 and e_i e_j = -e_j e_i.

Blades are bitmasks (generator i at bit i-1). Products are looked up in a
cached sign/index table for n <= TABLE_DIM and computed row by row above that.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

import numpy as np
from cachetools import LRUCache, cached

from core.errors import InvalidDimensionError
from utils.text import format_multivector

logger = logging.getLogger(__name__)

MAX_DIM = 12
TABLE_DIM = 8
SOLVER_DIM = 4

BladeIndex = int

_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << MAX_DIM)], dtype=np.int64)


def check_dimension(n: int, limit: int = MAX_DIM) -> int:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= limit:
        raise InvalidDimensionError(f"Algebra dimension must lie in 1..{limit}, got {n}")
    return int(n)


def blade_from_indices(indices: Iterable[int], n: int) -> BladeIndex:
    mask = 0
    for i in indices:
        if not 1 <= i <= n:
            raise InvalidDimensionError(f"Generator index {i} outside 1..{n}")
        mask |= 1 << (i - 1)
    return mask


def blade_indices(a: BladeIndex) -> Tuple[int, ...]:
    return tuple(i + 1 for i in range(int(a).bit_length()) if a >> i & 1)


def _product_signs(a, b, n: int) -> np.ndarray:
    """Sign of e_a e_b: reordering parity plus one -1 per shared generator."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    swaps = _POPCOUNT[a & b]
    for k in range(1, n):
        swaps = swaps + _POPCOUNT[(a >> k) & b]
    return np.where(swaps & 1, -1.0, 1.0)


def blade_mul(a: BladeIndex, b: BladeIndex, n: int) -> Tuple[int, BladeIndex]:
    n = check_dimension(n)
    size = 1 << n
    if not (0 <= a < size and 0 <= b < size):
        raise InvalidDimensionError(f"Blade index outside R_{n}: {a}, {b}")
    return int(_product_signs(a, b, n)), a ^ b


@cached(LRUCache(maxsize=TABLE_DIM))
def cayley_table(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """(index, sign) tables with e_a e_b = sign[a, b] * e_{index[a, b]}"""
    n = check_dimension(n, TABLE_DIM)
    blades = np.arange(1 << n, dtype=np.int64)
    index = blades[:, None] ^ blades[None, :]
    sign = _product_signs(blades[:, None], blades[None, :], n)
    index.setflags(write=False)
    sign.setflags(write=False)
    logger.debug(f"Built Cayley table for R_{n} ({1 << n} blades)")
    return index, sign


@cached(LRUCache(maxsize=512))
def _product_row(a: int, n: int) -> Tuple[np.ndarray, np.ndarray]:
    blades = np.arange(1 << n, dtype=np.int64)
    index = a ^ blades
    sign = _product_signs(a, blades, n)
    index.setflags(write=False)
    sign.setflags(write=False)
    return index, sign


def product_row(a: int, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Row a of the Cayley table: indices and signs of e_a e_b over all b"""
    if n <= TABLE_DIM:
        index, sign = cayley_table(n)
        return index[a], sign[a]
    return _product_row(a, n)


@lru_cache(maxsize=MAX_DIM)
def conjugation_signs(n: int) -> np.ndarray:
    """Clifford conjugation on a grade-r blade is (-1)^(r(r+1)/2)"""
    grade = _POPCOUNT[: 1 << n]
    signs = np.where(((grade * (grade + 1)) // 2) % 2 == 0, 1.0, -1.0)
    signs.setflags(write=False)
    return signs


def mul_batched(x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    """Pointwise Clifford product of coefficient arrays shaped (..., 2^n)"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast_shapes(x.shape, y.shape))
    for a in range(1 << n):
        xa = x[..., a : a + 1]
        if not np.any(xa):
            continue
        index, sign = product_row(a, n)
        out[..., index] += sign * xa * y
    return out


Scalar = Union[int, float, np.floating]


@dataclass(frozen=True, eq=False)
class Multivector:
    """Element of R_n stored as 2^n dense real coefficients"""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        n = check_dimension(self.n)
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (1 << n,):
            raise InvalidDimensionError(
                f"R_{n} needs {1 << n} coefficients, got shape {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, n: int) -> "Multivector":
        return cls(n, np.zeros(1 << check_dimension(n)))

    @classmethod
    def scalar(cls, n: int, value: Scalar) -> "Multivector":
        coeffs = np.zeros(1 << check_dimension(n))
        coeffs[0] = value
        return cls(n, coeffs)

    @classmethod
    def basis(cls, n: int, blade: BladeIndex, value: Scalar = 1.0) -> "Multivector":
        n = check_dimension(n)
        if not 0 <= blade < 1 << n:
            raise InvalidDimensionError(f"Blade {blade} invalid for R_{n}")
        coeffs = np.zeros(1 << n)
        coeffs[blade] = value
        return cls(n, coeffs)

    @classmethod
    def generator(cls, n: int, i: int) -> "Multivector":
        return cls.basis(n, blade_from_indices([i], n))

    @classmethod
    def from_blades(cls, n: int, values: Mapping[BladeIndex, Scalar]) -> "Multivector":
        coeffs = np.zeros(1 << check_dimension(n))
        for blade, value in values.items():
            if not 0 <= blade < 1 << n:
                raise InvalidDimensionError(f"Blade {blade} invalid for R_{n}")
            coeffs[blade] += value
        return cls(n, coeffs)

    @classmethod
    def vector(cls, n: int, components: Sequence[float]) -> "Multivector":
        if len(components) != n:
            raise InvalidDimensionError(f"Expected {n} vector components, got {len(components)}")
        coeffs = np.zeros(1 << check_dimension(n))
        for i, value in enumerate(components):
            coeffs[1 << i] = value
        return cls(n, coeffs)

    def _coerce(self, other) -> "Multivector":
        if isinstance(other, Multivector):
            if other.n != self.n:
                raise InvalidDimensionError(f"Dimension mismatch: R_{self.n} vs R_{other.n}")
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Multivector.scalar(self.n, float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Multivector(self.n, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Multivector(self.n, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Multivector(self.n, other.coeffs - self.coeffs)

    def __neg__(self):
        return Multivector(self.n, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return mul(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Multivector(self.n, self.coeffs * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Multivector(self.n, self.coeffs * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Multivector(self.n, self.coeffs / float(other))
        return NotImplemented

    def __getitem__(self, blade: BladeIndex) -> float:
        return coefficient(self, blade)

    def conjugate(self) -> "Multivector":
        return conjugate(self)

    def scalar_part(self) -> float:
        return scalar_part(self)

    def norm(self) -> float:
        return norm(self)

    def is_paravector(self, atol: float = 0.0) -> bool:
        grade = _POPCOUNT[: 1 << self.n]
        return bool(np.all(np.abs(self.coeffs[grade > 1]) <= atol))

    def allclose(self, other: "Multivector", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        other = self._coerce(other)
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=rtol))

    def __repr__(self):
        return f"Multivector(n={self.n}, {format_multivector(self.coeffs)})"

    def __str__(self):
        return format_multivector(self.coeffs)


def _same_dimension(x: Multivector, y: Multivector) -> int:
    if x.n != y.n:
        raise InvalidDimensionError(f"Dimension mismatch: R_{x.n} vs R_{y.n}")
    return x.n


def mul(x: Multivector, y: Multivector) -> Multivector:
    n = _same_dimension(x, y)
    out = np.zeros(1 << n)
    for a in np.flatnonzero(x.coeffs):
        index, sign = product_row(int(a), n)
        out[index] += sign * x.coeffs[a] * y.coeffs
    return Multivector(n, out)


def right_mul(x: Multivector, c: Multivector) -> Multivector:
    """x * c, i.e. c acting from the right"""
    return mul(x, c)


def conjugate(x: Multivector) -> Multivector:
    return Multivector(x.n, x.coeffs * conjugation_signs(x.n))


def scalar_part(x: Multivector) -> float:
    return float(x.coeffs[0])


def coefficient(x: Multivector, a: BladeIndex) -> float:
    if not 0 <= a < 1 << x.n:
        raise InvalidDimensionError(f"Blade {a} invalid for R_{x.n}")
    return float(x.coeffs[a])


def norm(x: Multivector) -> float:
    return float(np.sqrt(np.dot(x.coeffs, x.coeffs)))


def vectorize(x: Multivector) -> np.ndarray:
    return np.array(x.coeffs)


def left_rep_matrix(c: Multivector) -> np.ndarray:
    """Matrix L with vectorize(c * x) = L @ vectorize(x)"""
    n = c.n
    size = 1 << n
    columns = np.arange(size)
    rep = np.zeros((size, size))
    for a in np.flatnonzero(c.coeffs):
        index, sign = product_row(int(a), n)
        rep[index, columns] += sign * c.coeffs[a]
    return rep


def right_rep_matrix(c: Multivector) -> np.ndarray:
    """Matrix R with vectorize(x * c) = R @ vectorize(x)"""
    n = c.n
    size = 1 << n
    blades = np.arange(size, dtype=np.int64)
    rep = np.zeros((size, size))
    for a in np.flatnonzero(c.coeffs):
        sign = _product_signs(blades, int(a), n)
        rep[blades ^ int(a), blades] += sign * c.coeffs[a]
    return rep


@dataclass(frozen=True)
class Paravector:
    """s = s0 + s_1 e_1 + ... + s_n e_n"""

    s0: float
    vec: Tuple[float, ...]

    def __post_init__(self):
        vec = tuple(float(v) for v in self.vec)
        check_dimension(len(vec))
        if not np.all(np.isfinite((self.s0,) + vec)):
            raise InvalidDimensionError("Paravector components must be finite")
        object.__setattr__(self, "s0", float(self.s0))
        object.__setattr__(self, "vec", vec)

    @classmethod
    def from_slice(cls, s0: float, s1: float, n: int) -> "Paravector":
        """s0 + s1 e_1 in R_n"""
        return cls(s0, (s1,) + (0.0,) * (check_dimension(n) - 1))

    @property
    def n(self) -> int:
        return len(self.vec)

    @property
    def modulus_sq(self) -> float:
        return self.s0 ** 2 + sum(v * v for v in self.vec)

    @property
    def modulus(self) -> float:
        return float(np.sqrt(self.modulus_sq))

    @property
    def imaginary_modulus(self) -> float:
        return float(np.sqrt(sum(v * v for v in self.vec)))

    def conjugate(self) -> "Paravector":
        return Paravector(self.s0, tuple(-v for v in self.vec))

    def to_multivector(self) -> Multivector:
        return Multivector.scalar(self.n, self.s0) + Multivector.vector(self.n, self.vec)


def sphere_residual(s: Paravector) -> Multivector:
    """s^2 - 2 s0 s + |s|^2, which vanishes on every paravector"""
    x = s.to_multivector()
    return mul(x, x) - 2.0 * s.s0 * x + s.modulus_sq


