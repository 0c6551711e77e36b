"""
Exact differential operators on PolyFields.

Coordinates are x_1..x_n; in hyperbolic geometry the last one is y > 0.
"""
import logging
from enum import Enum
from typing import Callable, Dict, Optional, Tuple

from core.clifford import Multivector, Paravector
from core.errors import InvalidDimensionError, InvalidParamsError
from core.fields import (
    PolyField,
    poly_add,
    poly_coord_mul,
    poly_derive,
    poly_left_mul,
    poly_mul,
    poly_scale,
)

logger = logging.getLogger(__name__)

PolyOperator = Callable[[PolyField], PolyField]


class OperatorKind(str, Enum):
    DIRAC_EUCLIDEAN = "dirac_euclidean"
    EULER = "euler"
    DIRAC_HYPERBOLIC = "dirac_hyperbolic"
    DIRAC_SPHERICAL = "dirac_spherical"


def constants(n: int) -> Tuple[float, float]:
    """(alpha_n, beta_n) = ((n-1)/2, alpha + alpha^2)"""
    if n < 2:
        raise InvalidDimensionError(f"Hyperbolic constants need n >= 2, got {n}")
    alpha = (n - 1) / 2
    return alpha, alpha + alpha * alpha


def _unit(n: int, axis: int) -> Tuple[int, ...]:
    exponent = [0] * n
    exponent[axis - 1] = 1
    return tuple(exponent)


def _sum(n: int, fields) -> PolyField:
    total = PolyField.zero(n)
    for field in fields:
        total = poly_add(total, field)
    return total


def dirac_euclidean(F: PolyField) -> PolyField:
    return _sum(F.n, (poly_left_mul(Multivector.generator(F.n, i), poly_derive(F, i)) for i in range(1, F.n + 1)))


def euler(F: PolyField) -> PolyField:
    return _sum(F.n, (poly_coord_mul(poly_derive(F, i), _unit(F.n, i)) for i in range(1, F.n + 1)))


def laplacian(F: PolyField) -> PolyField:
    return _sum(F.n, (poly_derive(poly_derive(F, i), i) for i in range(1, F.n + 1)))


def _check_hyperbolic(F: PolyField, n: Optional[int] = None) -> int:
    if n is not None and n != F.n:
        raise InvalidDimensionError(f"Field has n={F.n}, operator requested for n={n}")
    constants(F.n)
    return F.n


def _times_y(F: PolyField, power: int = 1) -> PolyField:
    exponent = [0] * F.n
    exponent[-1] = power
    return poly_coord_mul(F, exponent)


def dirac_hyperbolic(F: PolyField, n: Optional[int] = None) -> PolyField:
    """sum_i e_i y d_i F - alpha e_n F, with d_n = d_y"""
    n = _check_hyperbolic(F, n)
    alpha, _ = constants(n)
    terms = [poly_left_mul(Multivector.generator(n, i), _times_y(poly_derive(F, i))) for i in range(1, n + 1)]
    terms.append(poly_left_mul(Multivector.generator(n, n) * -alpha, F))
    return _sum(n, terms)


def _hyperbolic_square_terms(F: PolyField, n: int, with_drift: bool) -> PolyField:
    n = _check_hyperbolic(F, n)
    alpha, beta = constants(n)
    e_n = Multivector.generator(n, n)
    terms = [
        poly_scale(_times_y(laplacian(F), 2), -1.0),
        poly_left_mul(e_n, dirac_hyperbolic(F)),
        poly_scale(F, -beta),
    ]
    if with_drift:
        terms.append(poly_scale(_times_y(poly_derive(F, n)), 2.0 * alpha))
    return _sum(n, terms)


def dh_squared_formula(F: PolyField, n: Optional[int] = None) -> PolyField:
    """-y^2 Lap F + e_n D_H F + 2 alpha y d_y F - beta F"""
    return _hyperbolic_square_terms(F, n, with_drift=True)


def dh_squared_without_drift(F: PolyField, n: Optional[int] = None) -> PolyField:
    """Square as displayed without the 2 alpha y d_y term; only reported"""
    return _hyperbolic_square_terms(F, n, with_drift=False)


def dirac_spherical(F: PolyField) -> PolyField:
    """(1+|x|^2) D_e F - n x F"""
    n = F.n
    weighted = poly_mul(PolyField.radial_weight(n), dirac_euclidean(F))
    return poly_add(weighted, poly_scale(poly_mul(PolyField.paravector_field(n), F), -float(n)))


def euler_dirac_identity_residual(F: PolyField) -> PolyField:
    """D_e(xF) + 2EF + nF + x D_e F, identically zero"""
    n = F.n
    x = PolyField.paravector_field(n)
    return _sum(n, [
        dirac_euclidean(poly_mul(x, F)),
        poly_scale(euler(F), 2.0),
        poly_scale(F, float(n)),
        poly_mul(x, dirac_euclidean(F)),
    ])


def ds_squared_formula(F: PolyField) -> PolyField:
    """w^2 D_e^2 F + 2 x w D_e F + 2n w EF + n^2 F with w = 1+|x|^2"""
    n = F.n
    w = PolyField.radial_weight(n)
    x = PolyField.paravector_field(n)
    return _sum(n, [
        poly_scale(poly_mul(poly_mul(w, w), laplacian(F)), -1.0),
        poly_scale(poly_mul(x, poly_mul(w, dirac_euclidean(F))), 2.0),
        poly_scale(poly_mul(w, euler(F)), 2.0 * n),
        poly_scale(F, float(n * n)),
    ])


OPERATORS: Dict[OperatorKind, PolyOperator] = {
    OperatorKind.DIRAC_EUCLIDEAN: dirac_euclidean,
    OperatorKind.EULER: euler,
    OperatorKind.DIRAC_HYPERBOLIC: dirac_hyperbolic,
    OperatorKind.DIRAC_SPHERICAL: dirac_spherical,
}

SQUARES: Dict[OperatorKind, PolyOperator] = {
    OperatorKind.DIRAC_HYPERBOLIC: dh_squared_formula,
    OperatorKind.DIRAC_SPHERICAL: ds_squared_formula,
}


def apply_operator(kind: OperatorKind, F: PolyField) -> PolyField:
    return OPERATORS[OperatorKind(kind)](F)


def q_s_compose(T: PolyOperator, s: Paravector, F: PolyField) -> PolyField:
    """T^2 F - 2 s0 T F + |s|^2 F by double application"""
    TF = T(F)
    return _sum(F.n, [T(TF), poly_scale(TF, -2.0 * s.s0), poly_scale(F, s.modulus_sq)])


def q_s_apply(kind: OperatorKind, s: Paravector, F: PolyField) -> PolyField:
    """Q_s(T) F with T^2 taken from the closed-form square"""
    kind = OperatorKind(kind)
    if kind not in SQUARES:
        raise InvalidParamsError(f"Q_s needs a squared formula; {kind.value} has none")
    T = OPERATORS[kind]
    return _sum(F.n, [SQUARES[kind](F), poly_scale(T(F), -2.0 * s.s0), poly_scale(F, s.modulus_sq)])


def identity_residuals(F: PolyField, dh_formula: PolyOperator = dh_squared_formula) -> Dict[str, float]:
    """Largest coefficient residual of each operator identity on F"""
    n = F.n
    residuals = {
        "dirac_euclidean_square": poly_add(dirac_euclidean(dirac_euclidean(F)), laplacian(F)).max_abs_coeff(),
        "euler_dirac": euler_dirac_identity_residual(F).max_abs_coeff(),
        "spherical_square": (dirac_spherical(dirac_spherical(F)) - ds_squared_formula(F)).max_abs_coeff(),
    }
    if n >= 2:
        direct = dirac_hyperbolic(dirac_hyperbolic(F))
        residuals["hyperbolic_square"] = (direct - dh_formula(F)).max_abs_coeff()
        residuals["hyperbolic_square_no_drift"] = (direct - dh_squared_without_drift(F)).max_abs_coeff()
    return residuals
