import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgsurf.errors import GridRejected, InvalidParams, LightlikeLocus
from pgsurf.factorable import (
    FactorableSurface,
    GridSpec,
    ScalarC2,
    cross_check,
    curvature_report,
    default_grid,
    h_first,
    h_second,
    k_first,
    k_second,
    pipeline_grid,
    specialized_grid,
)
from pgsurf.families import thm31_family, thm32_family
from pgsurf.surface import finite_difference_jet, gaussian_curvature

SADDLE = FactorableSurface("first", ScalarC2.linear(1.0), ScalarC2.linear(1.0))
EXP = ScalarC2(np.exp, np.exp, np.exp, name="exp")
QUAD = ScalarC2(lambda t: t**2, lambda t: 2.0 * t, lambda t: 2.0 + 0.0 * t, name="t^2")

small = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


def poly_surface(kind, a, b, c, d):
    f = ScalarC2(lambda t: a * t + b, lambda t: a + 0.0 * t, lambda t: 0.0 * t)
    g = ScalarC2(lambda t: c * t**2 + d, lambda t: 2.0 * c * t, lambda t: 2.0 * c + 0.0 * t)
    return FactorableSurface(kind, f, g)


class TestScalarC2:
    def test_derivative_consistency(self):
        s = thm31_family(2.0, lam1=0.3)
        for t in (-1.0, 0.0, 0.8):
            assert s.f.derivative_gap(t) < 1e-9

    def test_constant_and_linear_builders(self):
        c = ScalarC2.constant(3.0)
        lin = ScalarC2.linear(2.0, -1.0)
        ts = np.array([-1.0, 0.0, 4.0])
        assert np.all(c(ts) == 3.0) and np.all(c.deriv(ts) == 0.0)
        assert np.allclose(lin(ts), 2.0 * ts - 1.0)

    def test_bad_kind_rejected(self):
        with pytest.raises(InvalidParams):
            FactorableSurface("third", QUAD, QUAD)


class TestKFirst:
    def test_saddle_origin(self):
        assert k_first(SADDLE, 0.0, 0.0) == -1.0

    @settings(max_examples=40, deadline=None)
    @given(small, small, small)
    def test_constant_factor_flattens(self, c, x, y):
        s = FactorableSurface("first", QUAD, ScalarC2.constant(c))
        assert k_first(s, x, y) == 0.0

    def test_tanh_times_linear_is_minus_one(self):
        s = thm31_family(1.0)
        for x, y in [(-1.2, 0.3), (0.0, -0.7), (0.9, 2.0)]:
            assert k_first(s, x, y) == pytest.approx(-1.0, abs=1e-12)

    def test_tanh_against_fd_pipeline_oracle(self):
        # independent route: finite differences of the parametrization, then
        # the general pipeline; relation K_pipeline = -eps * K_closed with
        # eps = +1 on this spacelike family
        s = thm31_family(1.0)
        for x, y in [(0.25, -0.4), (-0.6, 1.1)]:
            fd = finite_difference_jet(s.position, x, y)
            assert -gaussian_curvature(fd) == pytest.approx(k_first(s, x, y), abs=1e-5)

    def test_lightlike_locus_raises(self):
        s = FactorableSurface("first", ScalarC2.constant(1.0), ScalarC2.linear(1.0))
        with pytest.raises(LightlikeLocus):
            k_first(s, 0.2, 0.4)

    def test_wrong_kind_rejected(self):
        s = FactorableSurface("second", QUAD, QUAD)
        with pytest.raises(InvalidParams):
            k_first(s, 0.1, 0.1)


class TestHFirst:
    @settings(max_examples=40, deadline=None)
    @given(small, small)
    def test_linear_g_is_minimal(self, x, y):
        s = FactorableSurface("first", QUAD, ScalarC2.linear(0.5, 1.0))
        # skip the lightlike locus (f g')^2 = 1
        if abs(1.0 - (float(QUAD(x)) * 0.5) ** 2) < 1e-6:
            return
        assert h_first(s, x, y) == 0.0

    def test_sqrt_profile_unit_mean_curvature(self):
        s = thm32_family(1.0, causal="spacelike")
        lo = s.g.domain[0]
        for y in (lo + 0.2, lo + 0.6, lo + 1.4):
            assert abs(h_first(s, 0.0, y)) == pytest.approx(1.0, abs=1e-10)

    def test_plugin_arithmetic_example(self):
        # f = 2, g = y^2/4: at y = 0, H = f g''/2 = 2*(1/2)/2 = 1/2
        g = ScalarC2(lambda t: t**2 / 4.0, lambda t: t / 2.0, lambda t: 0.5 + 0.0 * t)
        s = FactorableSurface("first", ScalarC2.constant(2.0), g)
        assert h_first(s, 0.0, 0.0) == pytest.approx(0.5, abs=1e-14)


class TestKSecond:
    def test_equal_rate_exponentials_flat_limit(self):
        s = FactorableSurface("second", EXP, EXP)
        for y, z in [(0.0, 0.0), (0.5, -0.3), (-1.0, 1.0)]:
            assert k_second(s, y, z) == 0.0

    @settings(max_examples=40, deadline=None)
    @given(small, small, small)
    def test_constant_factor_flattens(self, c, y, z):
        s = FactorableSurface("second", ScalarC2.constant(c), QUAD)
        if abs(c) < 1e-3 or abs(z) < 1e-3:
            return  # keep the denominator (c*2z)^4 well away from zero
        assert k_second(s, y, z) == 0.0

    def test_plugin_arithmetic_example(self):
        s = poly_surface("second", 1.0, 0.0, 1.0, 0.0)  # f = y, g = z^2
        assert k_second(s, 1.0, 1.0) == pytest.approx(-4.0 / 9.0, rel=1e-14)

    def test_lightlike_without_flat_numerator_raises(self):
        s = FactorableSurface("second", ScalarC2.linear(1.0), ScalarC2.linear(1.0))
        with pytest.raises(LightlikeLocus):
            k_second(s, 1.0, 1.0)  # (fg')^2 == (f'g)^2 with nonzero numerator

    @settings(max_examples=30, deadline=None)
    @given(small, small)
    def test_role_symmetry(self, y, z):
        a = FactorableSurface("second", QUAD, CUBIC_LOCAL)
        b = FactorableSurface("second", CUBIC_LOCAL, QUAD)
        try:
            ka = k_second(a, y, z)
            kb = k_second(b, z, y)
        except LightlikeLocus:
            return
        if abs(ka) > 1e6:
            return  # near-singular denominators are numerically meaningless
        assert kb == pytest.approx(ka, rel=1e-8, abs=1e-9)


CUBIC_LOCAL = ScalarC2(lambda t: t**3 + 1.5, lambda t: 3.0 * t**2, lambda t: 6.0 * t)


class TestHSecond:
    def test_linear_pair_lightlike_on_diagonal(self):
        s = FactorableSurface("second", ScalarC2.linear(1.0), ScalarC2.linear(1.0))
        with pytest.raises(LightlikeLocus):
            h_second(s, 1.0, 1.0)

    def test_plugin_arithmetic_example(self):
        # f = y, g = z at (1, 2): timelike, H = -4 / (2*3^(3/2))
        s = FactorableSurface("second", ScalarC2.linear(1.0), ScalarC2.linear(1.0))
        assert h_second(s, 1.0, 2.0) == pytest.approx(-2.0 / 3.0**1.5, rel=1e-14)

    def test_equal_rate_exponentials_minimal(self):
        s = FactorableSurface("second", EXP, EXP)
        assert h_second(s, 0.3, -0.8) == 0.0


class TestCrossCheck:
    def test_saddle_agreement(self):
        report = cross_check(SADDLE, GridSpec((-0.5, 0.5), (-0.5, 0.5), 15, 15))
        assert report.consistent
        assert report.max_discrepancy < 1e-9
        assert report.sigma["K-first/spacelike"] == -1
        # H vanishes identically on the saddle; no sign information there

    def test_thm31_agreement(self):
        s = thm31_family(2.0, lam1=0.4, lam2=-0.3)
        report = cross_check(s, default_grid(s, 12, 12))
        assert report.consistent and report.max_discrepancy < 1e-9

    def test_second_kind_sigma_is_plus_one_for_H(self):
        s = poly_surface("second", 1.0, 0.2, 1.0, 0.5)
        report = cross_check(s, GridSpec((0.8, 1.4), (0.9, 1.3), 10, 10))
        assert report.consistent
        for key, value in report.sigma.items():
            if key.startswith("H-"):
                assert value == 1

    def test_lightlike_crossing_grid_rejected(self):
        # the saddle has f g' = x; a grid hitting x = 1 exactly is rejected
        grid = GridSpec((0.5, 1.5), (-0.5, 0.5), 21, 5)
        with pytest.raises(GridRejected):
            cross_check(SADDLE, grid)


class TestGridsAndReports:
    def test_grid_validation(self):
        with pytest.raises(InvalidParams):
            GridSpec((0.0, 1.0), (0.0, 1.0), 1, 5)
        with pytest.raises(InvalidParams):
            GridSpec((1.0, 0.0), (0.0, 1.0), 5, 5)
        with pytest.raises(InvalidParams):
            GridSpec((0.0, float("inf")), (0.0, 1.0), 5, 5)

    def test_default_grid_respects_semi_infinite_domain(self):
        s = thm32_family(0.5, causal="spacelike")
        grid = default_grid(s, 10, 10)
        lo = s.g.domain[0]
        assert grid.u2[0] > lo

    def test_curvature_report_constancy(self):
        s = thm31_family(1.5)
        rep = curvature_report(s, default_grid(s, 15, 15), route="specialized")
        stats = rep.stats("K")
        assert stats["mean"] == pytest.approx(-1.5, abs=1e-10)
        assert stats["max_deviation"] < 1e-9
        pipe = curvature_report(s, default_grid(s, 15, 15), route="pipeline")
        assert pipe.stats("K")["mean"] == pytest.approx(1.5, abs=1e-10)
        assert rep.n_excluded == 0

    def test_specialized_grid_marks_flat_limit_points(self):
        s = FactorableSurface("second", EXP, EXP)
        data = specialized_grid(s, GridSpec((-0.5, 0.5), (-0.5, 0.5), 5, 5))
        assert not np.any(data["excluded"])
        assert np.all(data["K"] == 0.0)
        pipe = pipeline_grid(s, GridSpec((-0.5, 0.5), (-0.5, 0.5), 5, 5))
        assert np.all(pipe["excluded"])
