import math

import numpy as np
import pytest

from core.clifford import Multivector, conjugate
from core.errors import DegreeOverflowError, GridMismatchError, InvalidDomainError
from core.fields import (
    BoxDomain,
    Geometry,
    Grid,
    GridFunction,
    PolyField,
    domain_extrema,
    grid_function_from_frame,
    grid_function_to_frame,
    inner_product_L2,
    norm_H1,
    norm_L2,
    poincare_constant_box,
    poly_conjugate,
    poly_derive,
    poly_evaluate,
    poly_evaluate_many,
    poly_integrate_box,
    poly_mul,
    poly_right_mul,
    reference_element,
    sample_poly_to_grid,
    seminorm_D,
)


class TestBoxDomain:
    def test_rejects_empty_or_mismatched_bounds(self):
        with pytest.raises(InvalidDomainError):
            BoxDomain((0.0, 1.0), (1.0, 1.0))
        with pytest.raises(InvalidDomainError):
            BoxDomain((0.0,), (1.0, 1.0))

    def test_hyperbolic_needs_positive_y(self):
        with pytest.raises(InvalidDomainError):
            BoxDomain((0.0, 0.0), (1.0, 1.0), Geometry.HYPERBOLIC)
        with pytest.raises(InvalidDomainError):
            BoxDomain((1.0,), (2.0,), Geometry.HYPERBOLIC)

    @pytest.mark.parametrize(
        "lo, hi, geometry, expected",
        [
            ((0.0, 1.0), (1.0, 2.0), Geometry.HYPERBOLIC, (1.0, 2.0)),
            ((0.0, 3.0), (1.0, 4.0), Geometry.HYPERBOLIC, (3.0, 4.0)),
            ((-1.0, -1.0), (1.0, 1.0), Geometry.SPHERICAL, (0.0, math.sqrt(2.0))),
            ((1.0, 1.0), (2.0, 2.0), Geometry.SPHERICAL, (math.sqrt(2.0), math.sqrt(8.0))),
        ],
    )
    def test_extrema(self, lo, hi, geometry, expected):
        m, M = domain_extrema(BoxDomain(lo, hi, geometry))
        assert m == pytest.approx(expected[0])
        assert M == pytest.approx(expected[1])

    def test_poincare_constant_of_the_unit_square(self):
        box = BoxDomain((0.0, 0.0), (1.0, 1.0))
        assert poincare_constant_box(box) == pytest.approx(1.0 / (math.pi * math.sqrt(2.0)))


class TestPolyField:
    def test_zero_terms_are_dropped(self):
        F = PolyField(2, {(1, 0): np.zeros(4), (0, 1): [1.0, 0.0, 0.0, 0.0]})
        assert len(F) == 1
        assert F.degree == 1
        assert PolyField.zero(2).is_zero()

    def test_degree_cap(self):
        with pytest.raises(DegreeOverflowError):
            PolyField.monomial(2, (9, 0))

    def test_derivative(self):
        F = PolyField.monomial(2, (2, 1), 3.0)
        assert poly_derive(F, 1).coefficient((1, 1)).allclose(Multivector.scalar(2, 6.0))
        assert poly_derive(F, 2).coefficient((2, 0)).allclose(Multivector.scalar(2, 3.0))

    def test_paravector_field_squares_to_minus_radius(self):
        x = PolyField.paravector_field(3)
        square = poly_mul(x, x) + PolyField.radial_weight(3) - PolyField.constant(3, 1.0)
        assert square.is_zero()

    def test_left_multiplication_by_a_constant(self):
        e1 = Multivector.generator(2, 1)
        F = PolyField.coordinate(2, 2, Multivector.generator(2, 2))
        assert (e1 * F).coefficient((0, 1)).allclose(Multivector.basis(2, 3))

    def test_right_multiplication_by_a_constant(self):
        F = PolyField.coordinate(2, 2, Multivector.generator(2, 2))
        assert poly_right_mul(F, Multivector.generator(2, 1)).coefficient((0, 1)).allclose(Multivector.basis(2, 3) * -1.0)
        with pytest.raises(GridMismatchError):
            poly_right_mul(F, Multivector.generator(3, 1))

    def test_conjugate_commutes_with_evaluation(self):
        F = PolyField.random(3, 2, np.random.default_rng(7))
        point = (0.3, -1.2, 0.8)
        assert poly_evaluate(poly_conjugate(F), point).allclose(conjugate(poly_evaluate(F, point)))
        assert (poly_conjugate(poly_conjugate(F)) - F).is_zero()

    def test_evaluation_and_integration(self):
        F = PolyField.monomial(2, (1, 1), 2.0) + PolyField.constant(2, Multivector.generator(2, 1))
        value = poly_evaluate(F, (0.5, 3.0))
        assert value.allclose(Multivector.from_blades(2, {0: 3.0, 1: 1.0}))
        total = poly_integrate_box(F, BoxDomain((0.0, 0.0), (1.0, 1.0)))
        assert total.allclose(Multivector.from_blades(2, {0: 0.5, 1: 1.0}))


def test_reference_element_is_a_partition_of_unity():
    ref = reference_element(3, 4)
    assert np.allclose(ref.values.sum(axis=1), 1.0)
    assert np.allclose(ref.grads.sum(axis=1), 0.0)
    assert ref.weights.sum() == pytest.approx(1.0)


class TestGrid:
    def test_counts(self, hyperbolic_grid):
        assert hyperbolic_grid.node_count == 17 * 17
        assert hyperbolic_grid.cell_count == 16 * 16
        assert len(hyperbolic_grid.interior_nodes) == 15 * 15
        assert np.allclose(hyperbolic_grid.spacing, [1 / 16, 1 / 16])

    def test_needs_two_cells_per_axis(self, hyperbolic_box):
        with pytest.raises(InvalidDomainError):
            Grid(hyperbolic_box, (1, 4))

    def test_quadrature_integrates_polynomials_exactly(self, hyperbolic_grid):
        points, weights = hyperbolic_grid.quadrature
        values = points[..., 0] ** 3 * points[..., 1] ** 2
        assert np.einsum("cq,q->", values, weights) == pytest.approx(7.0 / 12.0, rel=1e-13)


class TestGridFunction:
    def test_shape_is_checked(self, hyperbolic_grid):
        with pytest.raises(GridMismatchError):
            GridFunction(hyperbolic_grid, np.zeros((3, 4)))

    def test_constant_norms(self, spherical_grid):
        F = GridFunction.constant(spherical_grid, Multivector.generator(2, 1))
        assert norm_L2(F) == pytest.approx(2.0)
        assert seminorm_D(F) == pytest.approx(0.0, abs=1e-14)
        assert inner_product_L2(F, F).allclose(Multivector.scalar(2, 4.0))

    def test_linear_field_has_exact_gradient_norm(self, hyperbolic_grid):
        F = sample_poly_to_grid(PolyField.coordinate(2, 1, 3.0), hyperbolic_grid)
        assert seminorm_D(F) == pytest.approx(3.0)
        assert norm_H1(F) == pytest.approx(math.hypot(norm_L2(F), 3.0))

    def test_inner_product_is_conjugate_symmetric(self, hyperbolic_grid, rng):
        F = GridFunction.random(hyperbolic_grid, rng)
        G = GridFunction.random(hyperbolic_grid, rng)
        assert inner_product_L2(F, G).allclose(inner_product_L2(G, F).conjugate(), atol=1e-12)

    def test_constrained_functions_vanish_on_the_boundary(self, hyperbolic_grid, rng):
        F = GridFunction.random(hyperbolic_grid, rng, constrained=True)
        assert F.is_constrained()
        assert not GridFunction.random(hyperbolic_grid, rng).is_constrained()

    def test_clifford_multiplication_acts_nodewise(self, hyperbolic_grid, rng):
        F = GridFunction.random(hyperbolic_grid, rng)
        c = Multivector(2, [0.5, -1.0, 2.0, 0.25])
        assert F.left_mul(c).nodal(7).allclose(c * F.nodal(7))
        assert F.right_mul(c).nodal(7).allclose(F.nodal(7) * c)

    def test_interpolation_reproduces_bilinear_fields(self, hyperbolic_grid):
        P = PolyField.monomial(2, (1, 1), Multivector.generator(2, 2))
        F = sample_poly_to_grid(P, hyperbolic_grid)
        point = np.array([[0.3, 1.7]])
        assert np.allclose(F.evaluate_at(point), poly_evaluate_many(P, point))

    def test_grids_must_match(self, hyperbolic_grid, spherical_grid):
        with pytest.raises(GridMismatchError):
            GridFunction.zeros(hyperbolic_grid) + GridFunction.zeros(spherical_grid)

    def test_nodal_frame(self, hyperbolic_grid, rng):
        F = GridFunction.random(hyperbolic_grid, rng)
        frame = grid_function_to_frame(F)
        assert list(frame.columns) == ["i1", "i2", "blade_mask", "value"]
        assert len(frame) == hyperbolic_grid.node_count * 4
        assert np.array_equal(grid_function_from_frame(hyperbolic_grid, frame).values, F.values)
        with pytest.raises(GridMismatchError):
            grid_function_from_frame(hyperbolic_grid, frame.drop(columns=["blade_mask"]))


class TestInnerProduct:
    def test_right_linear_in_the_second_slot(self, hyperbolic_grid, rng):
        F, G, H = (GridFunction.random(hyperbolic_grid, rng) for _ in range(3))
        a = Multivector(2, [0.5, -1.0, 2.0, 0.25])
        b = Multivector(2, [-0.3, 0.0, 1.5, -2.0])
        combined = inner_product_L2(F, G.right_mul(a) + H.right_mul(b))
        expected = inner_product_L2(F, G) * a + inner_product_L2(F, H) * b
        assert combined.allclose(expected, atol=1e-12)

    def test_antilinear_in_the_first_slot(self, hyperbolic_grid, rng):
        F, G, H = (GridFunction.random(hyperbolic_grid, rng) for _ in range(3))
        a = Multivector(2, [1.0, 0.75, -0.5, 0.1])
        b = Multivector(2, [0.0, -2.0, 0.3, 1.0])
        combined = inner_product_L2(F.right_mul(a) + G.right_mul(b), H)
        expected = conjugate(a) * inner_product_L2(F, H) + conjugate(b) * inner_product_L2(G, H)
        assert combined.allclose(expected, atol=1e-12)

    def test_left_constants_move_across_as_conjugates(self, hyperbolic_grid, rng):
        G, H = GridFunction.random(hyperbolic_grid, rng), GridFunction.random(hyperbolic_grid, rng)
        c = Multivector(2, [0.2, 1.0, -0.7, 0.4])
        moved = inner_product_L2(G.left_mul(conjugate(c)), H)
        assert inner_product_L2(G, H.left_mul(c)).allclose(moved, atol=1e-12)

    def test_cauchy_schwarz(self, hyperbolic_grid, spherical_grid, rng):
        for grid in (hyperbolic_grid, spherical_grid) * 25:
            weight = 2.0 ** (grid.n / 2)
            F, G = GridFunction.random(grid, rng), GridFunction.random(grid, rng)
            product = norm_L2(F) * norm_L2(G)
            value = inner_product_L2(F, G)
            assert abs(value.scalar_part()) <= product * (1.0 + 1e-12)
            assert value.norm() <= weight * product * (1.0 + 1e-12)

    def test_poincare_inequality_on_constrained_functions(self, hyperbolic_box, hyperbolic_grid, rng):
        c_p = poincare_constant_box(hyperbolic_box)
        for _ in range(500):
            F = GridFunction.random(hyperbolic_grid, rng, constrained=True)
            assert norm_L2(F) <= c_p * seminorm_D(F) * (1.0 + 1e-12)
