import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robin_scope.implementations import geometry
from robin_scope.implementations.errors import GeometryErrors, SpectralException


def symmetric_gauge(x, y):
    return -0.5 * y, 0.5 * x


# ============================================================================
# Fixtures
# ============================================================================

@pytest.fixture(scope="module")
def unit_circle():
    return geometry.circle(1.0, 256)


@pytest.fixture(scope="module")
def circle_collar(unit_circle):
    return geometry.build_collar(unit_circle)


# ============================================================================
# Curves
# ============================================================================

class TestCurves:

    def test_circle_length_and_curvature(self, unit_circle):
        assert unit_circle.total_length == pytest.approx(2.0 * math.pi)
        assert unit_circle.counterclockwise
        assert np.allclose(unit_circle.curvature_samples, 1.0, atol=1e-3)
        assert geometry.total_curvature(unit_circle) == pytest.approx(2.0 * math.pi, abs=1e-3)

    def test_circle_starts_at_positive_axis(self, unit_circle):
        assert np.allclose(geometry.position(unit_circle, 0.0), [1.0, 0.0])
        assert np.allclose(geometry.outward_normal(unit_circle, 0.0), [1.0, 0.0], atol=1e-8)
        assert np.allclose(geometry.unit_tangent(unit_circle, 0.0), [0.0, 1.0], atol=1e-8)

    def test_ellipse_vertex_curvature(self):
        curve = geometry.ellipse(2.0, 1.0, 512)
        # k = a / b^2 at (a, 0)
        assert geometry.curvature(curve, 0.0) == pytest.approx(2.0, rel=1e-2)
        assert geometry.curvature_spline(curve, 0.0) == pytest.approx(2.0, rel=1e-2)
        assert geometry.total_curvature(curve) == pytest.approx(2.0 * math.pi, abs=1e-2)

    def test_clockwise_points_are_reoriented(self):
        theta = np.linspace(0.0, 2.0 * math.pi, 200, endpoint=False)[::-1]
        curve = geometry.from_points(np.column_stack([np.cos(theta), np.sin(theta)]), 128)
        assert curve.counterclockwise
        assert np.all(curve.curvature_samples > 0)

    def test_resampling_is_uniform_in_arc_length(self):
        curve = geometry.ellipse(3.0, 1.0, 256)
        gaps = np.linalg.norm(np.diff(curve.closed_samples, axis=0), axis=1)
        assert np.max(gaps) / np.min(gaps) < 1.01

    def test_too_few_samples(self):
        with pytest.raises(SpectralException) as exc:
            geometry.from_points(np.array([[0, 0], [1, 0], [0, 1]]))
        assert exc.value.error_code == GeometryErrors.DEGENERATE_CURVE

    def test_self_intersecting_curve(self):
        theta = np.linspace(0.0, 2.0 * math.pi, 400, endpoint=False)
        eight = np.column_stack([np.sin(2.0 * theta), np.sin(theta)])
        with pytest.raises(SpectralException) as exc:
            geometry.from_points(eight, 256)
        assert exc.value.error_code == GeometryErrors.DEGENERATE_CURVE

    def test_square_has_corners(self):
        curve = geometry.square(2.0, 64)
        assert curve.total_length == pytest.approx(8.0)
        assert not curve.smooth
        assert geometry.total_curvature(curve) == pytest.approx(2.0 * math.pi)


class TestCurveFiles:

    def test_load_comma_separated(self, tmp_path):
        theta = np.linspace(0.0, 2.0 * math.pi, 100, endpoint=False)
        path = tmp_path / "circle.csv"
        rows = "\n".join(f"{2 * math.cos(t)},{2 * math.sin(t)}" for t in theta)
        path.write_text("# x, y\n" + rows + "\n")
        curve = geometry.load_curve(path, 128)
        assert curve.total_length == pytest.approx(4.0 * math.pi, rel=1e-4)

    def test_wrong_column_count(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("\n".join("1 2 3" for _ in range(10)))
        with pytest.raises(SpectralException) as exc:
            geometry.load_curve(path)
        assert exc.value.error_code == GeometryErrors.INVALID_CURVE_FILE

    def test_unparseable_file(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("x y\nfoo bar\n")
        with pytest.raises(SpectralException) as exc:
            geometry.load_curve(path)
        assert exc.value.error_code == GeometryErrors.INVALID_CURVE_FILE


# ============================================================================
# Tubular coordinates
# ============================================================================

class TestCollar:

    def test_default_width_on_circle(self, circle_collar):
        assert 0.0 < circle_collar.t0 <= 0.5
        assert circle_collar.max_curvature == pytest.approx(1.0, abs=1e-3)

    def test_explicit_width_too_deep(self, unit_circle):
        with pytest.raises(SpectralException) as exc:
            geometry.build_collar(unit_circle, 1.0)
        assert exc.value.error_code == GeometryErrors.COLLAR_TOO_DEEP

    def test_square_has_no_collar(self):
        with pytest.raises(SpectralException) as exc:
            geometry.build_collar(geometry.square(1.0, 64))
        assert exc.value.error_code == GeometryErrors.COLLAR_TOO_DEEP

    def test_jacobian_on_circle(self, circle_collar):
        t = np.array([0.0, 0.1, 0.2])
        assert np.allclose(geometry.jacobian(circle_collar, 1.0, t), 1.0 - t, atol=1e-3)

    def test_outside_collar(self, circle_collar):
        with pytest.raises(SpectralException) as exc:
            geometry.from_boundary_coords(circle_collar, 0.0, circle_collar.t0)
        assert exc.value.error_code == GeometryErrors.OUTSIDE_COLLAR
        with pytest.raises(SpectralException):
            geometry.to_boundary_coords(circle_collar, [0.3, 0.0])

    @settings(max_examples=25, deadline=None)
    @given(
        s=st.floats(min_value=0.0, max_value=2.0 * math.pi, exclude_max=True),
        frac=st.floats(min_value=0.0, max_value=0.9),
    )
    def test_boundary_coords_roundtrip(self, circle_collar, s, frac):
        t = frac * circle_collar.t0
        x = geometry.from_boundary_coords(circle_collar, s, t)
        s_back, t_back = geometry.to_boundary_coords(circle_collar, x)
        gap = abs(s_back - s) % (2.0 * math.pi)
        assert min(gap, 2.0 * math.pi - gap) < 1e-6
        assert t_back == pytest.approx(t, abs=1e-6)


# ============================================================================
# Potentials
# ============================================================================

class TestPotentials:

    def test_pullback_of_symmetric_gauge(self, circle_collar):
        t = np.array([0.0, 0.1, 0.3])
        a1, a2 = geometry.pullback_potential(circle_collar, symmetric_gauge, 0.0, t)
        assert np.allclose(a1, 0.5 * (1.0 - t) ** 2, atol=1e-4)
        assert np.allclose(a2, 0.0, atol=1e-9)

    def test_collar_field_is_constant(self, circle_collar):
        B = geometry.collar_field(circle_collar, symmetric_gauge, np.array([0.0, 1.0, 4.0]), 0.2)
        assert np.allclose(B, 1.0, atol=1e-6)

    def test_gauge_normalization(self, circle_collar):
        gf = geometry.gauge_normalize(circle_collar, symmetric_gauge, 1.0, (0.5, 1.5, 0.2))
        assert np.all(gf.A2 == 0.0)
        assert np.allclose(gf.A1[:, 0], 0.0)
        assert gf.phase[64, 0] == pytest.approx(0.0, abs=1e-12)
        assert gf.B0 == pytest.approx(1.0, abs=1e-6)
        curl = geometry.normalized_curl(gf)
        expected = 1.0 - gf.t_grid[None, :] * np.ones_like(gf.s_grid)[:, None]
        assert np.allclose(curl, expected, atol=2e-3)
        assert gf.beta_ratio >= 0.0

    def test_window_deeper_than_collar(self, circle_collar):
        with pytest.raises(SpectralException) as exc:
            geometry.gauge_normalize(circle_collar, symmetric_gauge, 1.0, (0.5, 1.5, circle_collar.t0))
        assert exc.value.error_code == GeometryErrors.WINDOW_TOO_DEEP

    def test_anchor_outside_window(self, circle_collar):
        with pytest.raises(SpectralException) as exc:
            geometry.gauge_normalize(circle_collar, symmetric_gauge, 2.0, (0.5, 1.5, 0.1))
        assert exc.value.error_code == GeometryErrors.OUTSIDE_COLLAR
