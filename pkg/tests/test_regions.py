import math

import numpy as np
import pytest

from core.errors import InvalidParamsError, NoBoundError
from core.fields import BoxDomain, Geometry, poincare_constant_box
from core.regions import (
    RegionKind,
    RegionParams,
    RobinCoeffMode,
    SPoint,
    classify_spherical_geometry,
    continuity_constant,
    dirac_norm_bound,
    evaluate,
    hyperbolic_dirichlet,
    hyperbolic_dirichlet_poincare,
    hyperbolic_robin,
    lambda_nmb,
    region_sample,
    robin_load_hyperbolic,
    robin_load_spherical,
    s_resolvent_bound,
    s_resolvent_bound_hyperbolic,
    spherical_dirichlet,
    spherical_robin,
)

BETA_2 = 0.75
WINDOW = ((-5.0, 5.0), (0.0, 15.0))
SPHERICAL_WINDOW = ((-40.0, 40.0), (0.0, 40.0))
MAP_RES = (200, 200)


def _all_kinds_params():
    c_p = poincare_constant_box(BoxDomain((0.0, 1.0), (1.0, 2.0), Geometry.HYPERBOLIC))
    return {
        RegionKind.HYPERBOLIC_DIRICHLET: (RegionParams(2, 1.0, 2.0), WINDOW),
        RegionKind.HYPERBOLIC_DIRICHLET_POINCARE: (RegionParams(2, 1.0, 2.0, c_p=c_p), WINDOW),
        RegionKind.HYPERBOLIC_ROBIN: (RegionParams(2, 3.0, 4.0, b_norm=0.1, trace_norm=3.0), ((-40.0, 40.0), (0.0, 60.0))),
        RegionKind.SPHERICAL_DIRICHLET: (RegionParams(2, 0.0, math.sqrt(2.0)), SPHERICAL_WINDOW),
        RegionKind.SPHERICAL_ROBIN: (RegionParams(2, 0.0, math.sqrt(2.0), b_norm=0.1, trace_norm=3.0), SPHERICAL_WINDOW),
    }


class TestParams:
    def test_validation(self):
        with pytest.raises(InvalidParamsError):
            RegionParams(1, 1.0, 2.0)
        with pytest.raises(InvalidParamsError):
            RegionParams(2, 2.0, 1.0)
        with pytest.raises(InvalidParamsError):
            RegionParams(2, 1.0, 2.0, b_norm=-1.0)
        with pytest.raises(InvalidParamsError):
            RegionParams(2, 1.0, 2.0, trace_norm=0.0)
        with pytest.raises(InvalidParamsError):
            SPoint(0.0, -1.0)

    def test_hyperbolic_needs_positive_m(self):
        with pytest.raises(InvalidParamsError):
            hyperbolic_dirichlet(RegionParams(2, 0.0, 2.0), SPoint(0.0, 10.0))

    def test_robin_needs_trace_norm(self):
        with pytest.raises(InvalidParamsError):
            hyperbolic_robin(RegionParams(2, 1.0, 2.0, b_norm=0.1), SPoint(0.0, 10.0))

    def test_poincare_needs_c_p(self, hyperbolic_params):
        with pytest.raises(InvalidParamsError):
            hyperbolic_dirichlet_poincare(hyperbolic_params, SPoint(0.0, 10.0))


class TestHyperbolicDirichlet:
    def test_certified_point(self, hyperbolic_params):
        verdict = hyperbolic_dirichlet(hyperbolic_params, SPoint(0.0, 10.0))
        assert verdict.admissible
        assert verdict.margins[0] == pytest.approx(99.75)
        assert verdict.margins[1] == pytest.approx(395.0 - 4.0 * (3.0 + math.sqrt(2.0)) ** 2)
        assert verdict.constant == pytest.approx(0.80107, rel=1e-4)

    def test_origin_is_not_certified(self, hyperbolic_params):
        verdict = hyperbolic_dirichlet(hyperbolic_params, SPoint(0.0, 0.0))
        assert not verdict.admissible
        assert verdict.margins[1] == pytest.approx(-76.94, abs=0.01)
        assert verdict.constant < 0

    def test_beta_circle_is_excluded(self, hyperbolic_params):
        verdict = hyperbolic_dirichlet(hyperbolic_params, SPoint(0.0, math.sqrt(BETA_2)))
        assert verdict.excluded
        assert not verdict.admissible

    def test_resolvent_bound(self, hyperbolic_params):
        s = SPoint(0.0, 10.0)
        K = hyperbolic_dirichlet(hyperbolic_params, s).constant
        expected = (10.0 + 0.5 + 2.0 * math.sqrt(2.0)) / K
        assert s_resolvent_bound_hyperbolic(hyperbolic_params, s) == pytest.approx(expected)
        with pytest.raises(NoBoundError):
            s_resolvent_bound(RegionKind.HYPERBOLIC_DIRICHLET, hyperbolic_params, SPoint(0.0, 0.0))


class TestPoincare:
    def test_thin_box_on_the_beta_circle(self):
        domain = BoxDomain((0.0, 1.0), (1.0, 1.1), Geometry.HYPERBOLIC)
        c_p = poincare_constant_box(domain)
        params = RegionParams(2, 1.0, 1.1, c_p=c_p)
        s = SPoint(0.0, math.sqrt(BETA_2))
        assert hyperbolic_dirichlet(params, s).excluded
        verdict = hyperbolic_dirichlet_poincare(params, s)
        assert verdict.admissible
        expected = 1.0 - c_p * 1.1 * (3.0 + math.sqrt(2.0)) - 0.5 * c_p ** 2
        assert verdict.constant == pytest.approx(expected)
        assert verdict.constant == pytest.approx(0.8457, abs=1e-3)

    def test_inside_the_beta_circle_uses_the_distance_to_it(self):
        params = RegionParams(2, 1.0, 2.0, c_p=0.1)
        # ||s|^2 - beta| equals alpha here, so the C_P^2 term vanishes
        verdict = hyperbolic_dirichlet_poincare(params, SPoint(0.0, 0.5))
        assert verdict.constant == pytest.approx(1.0 - 0.2 * (3.0 + math.sqrt(2.0)), rel=1e-12)
        assert verdict.constant == pytest.approx(0.117157287525381, rel=1e-12)
        assert verdict.admissible

    @pytest.mark.parametrize("s", [SPoint(0.0, 0.1), SPoint(0.2, 0.3), SPoint(-0.4, 0.6), SPoint(0.0, 3.0)])
    def test_constant_against_direct_evaluation(self, s):
        params = RegionParams(2, 1.0, 2.0, c_p=0.1)
        root = math.sqrt(1.0 + 4.0 * s.s0 ** 2)
        inner = abs(abs(s.modulus_sq - BETA_2) - 0.5 * root)
        expected = 1.0 - 0.1 * 2.0 * (3.0 + math.sqrt(2.0) * root) - inner * 0.01
        assert hyperbolic_dirichlet_poincare(params, s).constant == pytest.approx(expected, rel=1e-12)


class TestRobin:
    def test_coefficient_modes(self):
        base = dict(n=2, m=1.0, M=2.0, b_norm=0.1, trace_norm=2.0)
        statement = RegionParams(**base, robin_coeff_mode=RobinCoeffMode.STATEMENT)
        proof = RegionParams(**base)
        assert robin_load_hyperbolic(statement) == pytest.approx(0.1 * 4.0)
        assert robin_load_hyperbolic(proof) == pytest.approx(4.0 * robin_load_hyperbolic(statement))
        assert robin_load_spherical(proof) == pytest.approx(2.0 * 0.1 * 4.0)

    def test_lambda_is_linear_in_p(self):
        loaded = RegionParams(2, 1.0, 2.0, b_norm=1.0, trace_norm=1.0)
        assert lambda_nmb(loaded, 2.0) == pytest.approx(1.0)
        assert lambda_nmb(loaded, 2.0) - lambda_nmb(loaded, 1.0) == pytest.approx(1.0)
        assert lambda_nmb(RegionParams(3, 1.5, 2.0), 2.0) == pytest.approx(2.0 * 1.5 ** 2)

    def test_robin_constant_is_shifted_by_half_the_load(self):
        params = RegionParams(2, 3.0, 4.0, b_norm=0.1, trace_norm=3.0)
        s = SPoint(0.0, 30.0)
        dirichlet = hyperbolic_dirichlet(RegionParams(2, 3.0, 4.0), s)
        robin = hyperbolic_robin(params, s)
        assert robin.admissible
        assert robin.constant == pytest.approx(dirichlet.constant - 0.5 * robin_load_hyperbolic(params), rel=1e-9)

    @pytest.mark.parametrize("mode", list(RobinCoeffMode))
    def test_zero_coefficient_degenerates_to_dirichlet(self, mode):
        for s in (SPoint(0.0, 10.0), SPoint(1.3, 4.0), SPoint(-2.0, 0.1)):
            hyperbolic = RegionParams(2, 1.0, 2.0, robin_coeff_mode=mode)
            assert hyperbolic_robin(hyperbolic, s).constant == pytest.approx(
                hyperbolic_dirichlet(hyperbolic, s).constant, rel=1e-14, abs=1e-14
            )
        spherical = RegionParams(2, 0.0, math.sqrt(2.0), robin_coeff_mode=mode)
        for s in (SPoint(0.0, 31.0), SPoint(3.0, 10.0)):
            assert spherical_robin(spherical, s).constant == pytest.approx(
                spherical_dirichlet(spherical, s).constant, rel=1e-14, abs=1e-14
            )


class TestSpherical:
    def test_axis_threshold_points(self, spherical_params):
        at_30 = spherical_dirichlet(spherical_params, SPoint(0.0, 30.0))
        assert at_30.admissible
        assert at_30.margins[1] == pytest.approx(4.0, rel=1e-9)
        assert not spherical_dirichlet(spherical_params, SPoint(0.0, 29.0)).admissible

    def test_constant_at_31(self, spherical_params):
        verdict = spherical_dirichlet(spherical_params, SPoint(0.0, 31.0))
        assert verdict.admissible
        assert verdict.constant == pytest.approx(0.0673, abs=1e-4)

    def test_resolvent_bound(self, spherical_params):
        s = SPoint(0.0, 31.0)
        H = spherical_dirichlet(spherical_params, s).constant
        expected = (31.0 + 2.0 * math.sqrt(2.0) + 3.0 * math.sqrt(2.0)) / H
        assert s_resolvent_bound(RegionKind.SPHERICAL_DIRICHLET, spherical_params, s) == pytest.approx(expected)

    def test_axis_threshold_from_geometry(self, spherical_params):
        report = classify_spherical_geometry(spherical_params, grid_res=200)
        assert 29.0 < report.axis_threshold < 30.0
        assert report.implication_violations == 0

    def test_two_circle_case(self):
        report = classify_spherical_geometry(RegionParams(3, 0.1, 2.0), grid_res=400)
        assert report.two_circle
        assert report.implication_violations == 0
        assert report.radius_sq_printed - report.radius_sq_derived == pytest.approx(2.0 * (1.01 ** 2))
        assert report.centers == [(-6.0, 0.0), (6.0, 0.0)]


class TestRegionMaps:
    @pytest.mark.parametrize("kind", list(RegionKind))
    def test_admissibility_matches_constant_sign(self, kind):
        params, (s0_range, s1_range) = _all_kinds_params()[kind]
        region = region_sample(kind, params, s0_range, s1_range, MAP_RES, max_workers=1)
        considered = ~region.excluded
        mismatches = region.admissible[considered] != (region.constant[considered] > 0)
        assert not np.any(mismatches)
        margins_positive = np.all(region.margins > 0, axis=-1)
        assert np.array_equal(region.admissible[considered], margins_positive[considered])

    @pytest.mark.parametrize("kind", list(RegionKind))
    def test_s0_parity(self, kind):
        params, (_, s1_range) = _all_kinds_params()[kind]
        region = region_sample(kind, params, (-6.0, 6.0), s1_range, (101, 80), max_workers=1)
        assert np.allclose(region.constant, region.constant[::-1], rtol=1e-9, atol=1e-9)

    def test_hyperbolic_map_contains_the_certified_point(self, hyperbolic_params):
        region = region_sample(RegionKind.HYPERBOLIC_DIRICHLET, hyperbolic_params, (-5.0, 5.0), (0.0, 15.0), (101, 151))
        frame = region.to_frame()
        at_point = frame[np.isclose(frame.s0, 0.0) & np.isclose(frame.s1, 10.0)]
        assert at_point.admissible.tolist() == [1]
        at_origin = frame[np.isclose(frame.s0, 0.0) & np.isclose(frame.s1, 0.0)]
        assert at_origin.admissible.tolist() == [0]
        assert list(frame.columns) == ["s0", "s1", "admissible", "constant", "margin_1", "margin_2", "excluded"]

    def test_beta_band_is_excluded(self, hyperbolic_params):
        region = region_sample(RegionKind.HYPERBOLIC_DIRICHLET, hyperbolic_params, (-2.0, 2.0), (0.0, 2.0), (41, 21))
        s0, s1 = np.meshgrid(region.s0, region.s1, indexing="ij")
        near = np.abs(np.hypot(s0, s1) - math.sqrt(BETA_2)) < 0.05
        assert np.all(region.excluded[near])
        assert not np.any(region.admissible[region.excluded])

    def test_summary(self, spherical_params):
        region = region_sample(RegionKind.SPHERICAL_DIRICHLET, spherical_params, (-40.0, 40.0), (0.0, 40.0), (21, 21))
        summary = region.summary()
        assert summary["points"] == 441
        assert 0 < summary["admissible_fraction"] < 1
        assert summary["constant_min"] > 0

    def test_empty_ranges_are_rejected(self, hyperbolic_params):
        with pytest.raises(InvalidParamsError):
            region_sample(RegionKind.HYPERBOLIC_DIRICHLET, hyperbolic_params, (1.0, 1.0), (0.0, 1.0), (10, 10))


@pytest.mark.parametrize("geometry", [Geometry.HYPERBOLIC, Geometry.SPHERICAL])
def test_continuity_and_dirac_bounds_are_positive(geometry, hyperbolic_params):
    s = SPoint(0.5, 3.0)
    assert continuity_constant(geometry, hyperbolic_params, s) > 0
    assert dirac_norm_bound(geometry, hyperbolic_params, 1.0, 1.0) > 0


def test_evaluate_dispatches_by_kind(hyperbolic_params):
    s = SPoint(0.0, 10.0)
    assert evaluate("hyperbolic_dirichlet", hyperbolic_params, s) == hyperbolic_dirichlet(hyperbolic_params, s)
    assert RegionKind.SPHERICAL_ROBIN.geometry is Geometry.SPHERICAL
