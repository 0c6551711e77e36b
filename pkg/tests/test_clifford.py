"""
Algebraic laws of R_n on random multivectors
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from core.clifford import (
    Multivector,
    Paravector,
    blade_from_indices,
    blade_indices,
    blade_mul,
    cayley_table,
    check_dimension,
    conjugate,
    left_rep_matrix,
    mul,
    mul_batched,
    norm,
    product_row,
    right_rep_matrix,
    scalar_part,
    sphere_residual,
    vectorize,
)
from core.errors import InvalidDimensionError
from utils.text import blade_label, format_multivector

REL_TOLERANCE = 1e-12

coefficients = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


@st.composite
def multivectors(draw, count=1, max_dim=5):
    n = draw(st.integers(min_value=1, max_value=max_dim))
    return [Multivector(n, draw(arrays(np.float64, (1 << n,), elements=coefficients))) for _ in range(count)]


def _close(x: Multivector, y: Multivector, scale: float = 1.0) -> bool:
    return x.allclose(y, atol=REL_TOLERANCE * max(scale, 1.0))


@settings(max_examples=100, deadline=None)
@given(multivectors(count=3))
def test_associativity(triple):
    x, y, z = triple
    scale = norm(x) * norm(y) * norm(z) * (1 << x.n)
    assert _close(mul(mul(x, y), z), mul(x, mul(y, z)), scale)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_generators_square_to_minus_one_and_anticommute(n):
    for i in range(1, n + 1):
        e_i = Multivector.generator(n, i)
        assert (e_i * e_i).allclose(Multivector.scalar(n, -1.0))
        for j in range(i + 1, n + 1):
            e_j = Multivector.generator(n, j)
            assert (e_i * e_j + e_j * e_i).allclose(Multivector.zero(n))


@settings(max_examples=100, deadline=None)
@given(multivectors(count=2))
def test_conjugation_is_an_anti_automorphism(pair):
    x, y = pair
    scale = norm(x) * norm(y) * (1 << x.n)
    assert _close(conjugate(mul(x, y)), mul(conjugate(y), conjugate(x)), scale)
    assert conjugate(conjugate(x)).allclose(x)


@settings(max_examples=100, deadline=None)
@given(multivectors())
def test_scalar_part_of_conjugate_square_is_squared_norm(single):
    (x,) = single
    assert scalar_part(mul(conjugate(x), x)) == pytest.approx(norm(x) ** 2, rel=REL_TOLERANCE, abs=REL_TOLERANCE)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1, max_value=5), st.data())
def test_paravector_satisfies_its_quadratic(n, data):
    s0 = data.draw(coefficients)
    vec = data.draw(st.lists(coefficients, min_size=n, max_size=n))
    s = Paravector(s0, tuple(vec))
    assert sphere_residual(s).norm() <= REL_TOLERANCE * (1.0 + s.modulus_sq)
    product = mul(s.to_multivector(), s.conjugate().to_multivector())
    assert product.allclose(Multivector.scalar(n, s.modulus_sq), atol=REL_TOLERANCE)


@settings(max_examples=50, deadline=None)
@given(multivectors(count=2))
def test_product_norm_is_bounded(pair):
    x, y = pair
    bound = 2.0 ** (x.n / 2) * norm(x) * norm(y)
    assert norm(mul(x, y)) <= bound * (1.0 + REL_TOLERANCE) + REL_TOLERANCE


@settings(max_examples=50, deadline=None)
@given(multivectors(count=2))
def test_paravector_multiplication_scales_the_norm(pair):
    x, y = pair
    p = Multivector(x.n, np.where([bin(a).count("1") <= 1 for a in range(1 << x.n)], y.coeffs, 0.0))
    expected = norm(p) * norm(x)
    assert norm(mul(x, p)) == pytest.approx(expected, rel=1e-10, abs=1e-12)
    assert norm(mul(p, x)) == pytest.approx(expected, rel=1e-10, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(multivectors(count=2, max_dim=4))
def test_representation_matrices_match_the_product(pair):
    c, x = pair
    assert np.allclose(left_rep_matrix(c) @ vectorize(x), vectorize(mul(c, x)), atol=1e-12)
    assert np.allclose(right_rep_matrix(c) @ vectorize(x), vectorize(mul(x, c)), atol=1e-12)


def test_batched_product_matches_single_products(rng):
    n = 3
    x = rng.uniform(-1, 1, (5, 8))
    y = rng.uniform(-1, 1, (5, 8))
    batched = mul_batched(x, y, n)
    for k in range(5):
        assert np.allclose(batched[k], mul(Multivector(n, x[k]), Multivector(n, y[k])).coeffs)


def test_blade_products():
    e1, e2 = blade_from_indices([1], 2), blade_from_indices([2], 2)
    assert blade_mul(e1, e2, 2) == (1, 3)
    assert blade_mul(e2, e1, 2) == (-1, 3)
    assert blade_mul(3, 3, 2) == (-1, 0)
    assert blade_indices(0b101) == (1, 3)


def test_large_dimension_rows_agree_with_the_table():
    index, sign = cayley_table(8)
    row_index, row_sign = product_row(37, 8)
    assert np.array_equal(index[37], row_index)
    assert np.array_equal(sign[37], row_sign)
    e = Multivector.generator(12, 12)
    assert (e * e).allclose(Multivector.scalar(12, -1.0))


def test_invalid_dimensions():
    with pytest.raises(InvalidDimensionError):
        check_dimension(0)
    with pytest.raises(InvalidDimensionError):
        check_dimension(13)
    with pytest.raises(InvalidDimensionError):
        Multivector(2, np.zeros(3))
    with pytest.raises(InvalidDimensionError):
        Multivector.zero(2) + Multivector.zero(3)
    with pytest.raises(InvalidDimensionError):
        blade_from_indices([3], 2)


def test_text_rendering():
    assert blade_label(0) == "1"
    assert blade_label(0b101) == "e13"
    x = Multivector.from_blades(2, {0: 1.5, 3: -1.0})
    assert format_multivector(x.coeffs) == "1.5 - e12"
    assert str(Multivector.zero(2)) == "0"
