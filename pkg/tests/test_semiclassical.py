import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robin_scope.implementations import band1d, semiclassical
from robin_scope.implementations.datastructures import BandTable, FieldOnBoundary, RobinTrace
from robin_scope.implementations.errors import SemiclassicalErrors, SpectralException


def constant_data(curve, gamma: float, b: float = 1.0):
    return FieldOnBoundary.constant(b, curve.n_nodes), RobinTrace.constant(gamma, curve.total_length, curve.n_nodes)


# ============================================================================
# Piecewise-linear integrals
# ============================================================================

class TestExactIntegrals:

    def test_single_crossing_cell(self):
        grid = np.array([-1.0, 1.0])
        values = np.array([-1.0, 1.0])
        assert semiclassical.negative_part_integral(values, grid, 0.0) == pytest.approx(0.5)
        assert semiclassical.sublevel_length(values, grid, 0.0) == pytest.approx(1.0)

    def test_cells_entirely_below_and_above(self):
        grid = np.array([0.0, 1.0, 2.0, 3.0])
        values = np.array([0.0, 0.0, 5.0, 5.0])
        # below on [0, 1], crosses level 1 at 1.2, above afterwards
        assert semiclassical.sublevel_length(values, grid, 1.0) == pytest.approx(1.2)
        assert semiclassical.negative_part_integral(values, grid, 1.0) == pytest.approx(1.0 + 0.5 * 0.2 * 1.0)

    def test_nothing_below_level(self):
        grid = np.linspace(0.0, 1.0, 5)
        assert semiclassical.negative_part_integral(np.full(5, 2.0), grid, 1.0) == 0.0
        assert semiclassical.sublevel_length(np.full(5, 2.0), grid, 1.0) == 0.0


# ============================================================================
# Local densities
# ============================================================================

class TestDensities:

    def test_truncation_in_p(self, band_table):
        assert semiclassical.p_truncation(0.0, 0.9, band_table) == 1
        assert semiclassical.p_truncation(0.0, 0.5, band_table) == 0

    def test_truncation_needs_more_bands(self, band_table):
        with pytest.raises(SpectralException) as exc:
            semiclassical.p_truncation(0.0, 100.0, band_table)
        assert exc.value.error_code == SemiclassicalErrors.TABLE_TOO_SMALL

    def test_count_density_matches_band_roots(self, band_table):
        from_table = semiclassical.density_count(0.0, 1.0, 0.9, band_table)
        from_roots = band1d.sublevel_measure(1, 0.0, 0.9, band_table.disc)
        assert from_table == pytest.approx(from_roots, abs=2e-3)

    def test_energy_density_grows_with_attraction(self, band_table):
        neumann = semiclassical.density_energy(0.0, 1.0, 1.0, band_table)
        robin = semiclassical.density_energy(-1.0, 1.0, 1.0, band_table)
        assert 0.0 < neumann < robin

    def test_spectral_sum_is_the_unit_level_density(self, band_table):
        assert semiclassical.spectral_sum(-0.5, band_table) == semiclassical.density_energy(-0.5, 1.0, 1.0, band_table)

    def test_level_above_field(self, band_table):
        with pytest.raises(SpectralException) as exc:
            semiclassical.density_energy(0.0, 1.0, 1.5, band_table)
        assert exc.value.error_code == SemiclassicalErrors.LEVEL_ABOVE_FIELD
        with pytest.raises(SpectralException) as exc:
            semiclassical.density_count(0.0, 1.0, 1.0, band_table)
        assert exc.value.error_code == SemiclassicalErrors.LEVEL_NOT_BELOW_FIELD

    def test_table_without_xi_window(self, band_table):
        narrow = BandTable(
            gamma_grid=band_table.gamma_grid,
            xi_grid=band_table.xi_grid[:200],
            mu=band_table.mu[:, :, :200],
            disc=band_table.disc,
        )
        with pytest.raises(SpectralException) as exc:
            semiclassical.density_energy(0.0, 1.0, 1.0, narrow)
        assert exc.value.error_code == SemiclassicalErrors.TABLE_TOO_SMALL

    def test_gamma_outside_table(self, band_table):
        with pytest.raises(SpectralException) as exc:
            semiclassical.density_energy(1.5, 1.0, 1.0, band_table)
        assert exc.value.error_code == SemiclassicalErrors.TABLE_TOO_SMALL


# ============================================================================
# Boundary integrals
# ============================================================================

class TestLimits:

    def test_neumann_circle_equals_local_density(self, band_table, unit_circle_curve):
        field, trace = constant_data(unit_circle_curve, 0.0)
        result = semiclassical.energy_limit(unit_circle_curve, field, trace, 1.0, 1.0, band_table)
        assert result.value == pytest.approx(semiclassical.density_energy(0.0, 1.0, 1.0, band_table), rel=1e-12)
        assert result.p_max_used == 1
        assert result.quadrature_error_estimate <= 1e-3
        assert not result.unproven_regime

    def test_large_alpha_ignores_gamma(self, band_table, unit_circle_curve):
        field, robin = constant_data(unit_circle_curve, -1.0)
        _, neumann = constant_data(unit_circle_curve, 0.0)
        a = semiclassical.energy_limit(unit_circle_curve, field, robin, 1.0, 1.0, band_table).value
        b = semiclassical.energy_limit(unit_circle_curve, field, neumann, 1.0, 1.0, band_table).value
        assert a == b

    def test_half_alpha_sees_gamma(self, band_table, unit_circle_curve):
        field, robin = constant_data(unit_circle_curve, -1.0)
        _, neumann = constant_data(unit_circle_curve, 0.0)
        a = semiclassical.energy_limit(unit_circle_curve, field, robin, 1.0, 0.5, band_table).value
        b = semiclassical.energy_limit(unit_circle_curve, field, neumann, 1.0, 0.5, band_table).value
        assert a > b

    def test_split_boundary_averages(self, band_table, unit_circle_curve):
        n = unit_circle_curve.n_nodes
        field = FieldOnBoundary.constant(1.0, n)
        samples = np.where(np.arange(n) < n // 2, -1.0, 0.0)
        split = RobinTrace.from_samples(samples, unit_circle_curve.total_length)
        _, robin = constant_data(unit_circle_curve, -1.0)
        _, neumann = constant_data(unit_circle_curve, 0.0)
        value = semiclassical.energy_limit(unit_circle_curve, field, split, 1.0, 0.5, band_table).value
        parts = [
            semiclassical.energy_limit(unit_circle_curve, field, t, 1.0, 0.5, band_table).value
            for t in (robin, neumann)
        ]
        assert value == pytest.approx(0.5 * sum(parts), rel=1e-12)

    def test_threads_do_not_change_the_limit(self, band_table, unit_circle_curve):
        n = unit_circle_curve.n_nodes
        field = FieldOnBoundary.constant(1.0, n)
        trace = RobinTrace.from_samples(-np.cos(np.arange(n) * 2.0 * math.pi / n) ** 2, unit_circle_curve.total_length)
        serial = semiclassical.energy_limit(unit_circle_curve, field, trace, 1.0, 0.5, band_table)
        parallel = semiclassical.energy_limit(unit_circle_curve, field, trace, 1.0, 0.5, band_table, threads=3)
        assert serial.value == parallel.value

    def test_strong_field_empties_the_sublevel_set(self, band_table, unit_circle_curve):
        field, trace = constant_data(unit_circle_curve, 0.0, b=2.0)
        # lambda / B = 0.5 lies below Theta_0
        assert semiclassical.energy_limit(unit_circle_curve, field, trace, 1.0, 1.0, band_table).value == 0.0
        assert semiclassical.count_limit(unit_circle_curve, field, trace, 1.0, 1.0, band_table).value == 0.0

    @pytest.mark.parametrize("tol", [1e-3, 1e-2])
    def test_error_estimate_is_below_the_requested_tolerance(self, band_table, unit_circle_curve, tol):
        field, trace = constant_data(unit_circle_curve, -1.0)
        energy = semiclassical.energy_limit(unit_circle_curve, field, trace, 1.0, 0.5, band_table, tol)
        count = semiclassical.count_limit(unit_circle_curve, field, trace, 0.9, 0.5, band_table, tol)
        assert energy.quadrature_error_estimate < tol
        assert count.quadrature_error_estimate < tol

    def test_trace_unresolved_by_the_nodes(self, band_table, unit_circle_curve):
        n = unit_circle_curve.n_nodes
        field = FieldOnBoundary.constant(1.0, n)
        # even nodes see -1, odd nodes 0: halving the node set changes the integral
        samples = np.where(np.arange(n) % 2 == 0, -1.0, 0.0)
        trace = RobinTrace.from_samples(samples, unit_circle_curve.total_length)
        with pytest.raises(SpectralException) as exc:
            semiclassical.energy_limit(unit_circle_curve, field, trace, 1.0, 0.5, band_table)
        assert exc.value.error_code == SemiclassicalErrors.QUADRATURE_UNRESOLVED

    def test_count_is_the_energy_derivative(self, band_table, unit_circle_curve):
        field, trace = constant_data(unit_circle_curve, -1.0)
        step = 1e-4
        up = semiclassical.energy_limit(unit_circle_curve, field, trace, 0.9 + step, 0.5, band_table).value
        down = semiclassical.energy_limit(unit_circle_curve, field, trace, 0.9 - step, 0.5, band_table).value
        count = semiclassical.count_limit(unit_circle_curve, field, trace, 0.9, 0.5, band_table, exact=False).value
        assert (up - down) / (2.0 * step) == pytest.approx(count, rel=1e-4)

    def test_exact_and_interpolated_counts_agree(self, band_table, unit_circle_curve):
        field, trace = constant_data(unit_circle_curve, -1.0)
        exact = semiclassical.count_limit(unit_circle_curve, field, trace, 0.9, 0.5, band_table)
        table = semiclassical.count_limit(unit_circle_curve, field, trace, 0.9, 0.5, band_table, exact=False)
        assert exact.value == pytest.approx(table.value, abs=5e-3)

    def test_missing_sup_bound(self, band_table, unit_circle_curve):
        field = FieldOnBoundary.constant(1.0, unit_circle_curve.n_nodes)
        trace = RobinTrace.from_samples(
            np.full(unit_circle_curve.n_nodes, -0.5), unit_circle_curve.total_length, bounded=False
        )
        with pytest.raises(SpectralException) as exc:
            semiclassical.energy_limit(unit_circle_curve, field, trace, 1.0, 0.5, band_table)
        assert exc.value.error_code == SemiclassicalErrors.MISSING_SUP_BOUND
        relaxed = semiclassical.energy_limit(unit_circle_curve, field, trace, 1.0, 0.5, band_table, strict=False)
        assert relaxed.unproven_regime

    def test_level_checks(self, band_table, unit_circle_curve):
        field, trace = constant_data(unit_circle_curve, 0.0)
        with pytest.raises(SpectralException) as exc:
            semiclassical.energy_limit(unit_circle_curve, field, trace, 1.1, 1.0, band_table)
        assert exc.value.error_code == SemiclassicalErrors.LEVEL_ABOVE_FIELD
        with pytest.raises(SpectralException) as exc:
            semiclassical.count_limit(unit_circle_curve, field, trace, 1.0, 1.0, band_table)
        assert exc.value.error_code == SemiclassicalErrors.LEVEL_NOT_BELOW_FIELD

    def test_sample_counts_must_match(self, band_table, unit_circle_curve):
        field = FieldOnBoundary.constant(1.0, 10)
        _, trace = constant_data(unit_circle_curve, 0.0)
        with pytest.raises(SpectralException) as exc:
            semiclassical.energy_limit(unit_circle_curve, field, trace, 1.0, 1.0, band_table)
        assert exc.value.error_code == SemiclassicalErrors.INVALID_TRACE

    def test_field_below_its_infimum(self, band_table, unit_circle_curve):
        n = unit_circle_curve.n_nodes
        field = FieldOnBoundary(B_samples=np.full(n, 0.5), b=1.0)
        _, trace = constant_data(unit_circle_curve, 0.0)
        with pytest.raises(SpectralException) as exc:
            semiclassical.energy_limit(unit_circle_curve, field, trace, 1.0, 1.0, band_table)
        assert exc.value.error_code == SemiclassicalErrors.INVALID_TRACE


# ============================================================================
# Mollification
# ============================================================================

def step_trace(n: int = 1024) -> RobinTrace:
    samples = np.where(np.arange(n) < n // 3, -2.0, 0.5)
    return RobinTrace.from_samples(samples, 2.0 * math.pi)


class TestMollify:

    @settings(max_examples=30, deadline=None)
    @given(a=st.floats(min_value=0.01, max_value=2.0))
    def test_stays_within_the_sample_range(self, a):
        trace = step_trace()
        smooth = semiclassical.mollify(trace, a)
        assert np.all(smooth.gamma_samples >= -2.0 - 1e-12)
        assert np.all(smooth.gamma_samples <= 0.5 + 1e-12)
        assert smooth.essential_sup <= trace.essential_sup
        assert np.mean(smooth.gamma_samples) == pytest.approx(np.mean(trace.gamma_samples), abs=1e-12)

    def test_converges_in_l3(self):
        trace = step_trace()
        distances = [semiclassical.l3_distance(semiclassical.mollify(trace, a), trace) for a in (0.2, 0.1, 0.05)]
        assert all(b < a for a, b in zip(distances, distances[1:]))

    def test_unbounded_trace_stays_unbounded(self):
        trace = RobinTrace.from_samples(np.linspace(-1.0, 1.0, 64), 1.0, bounded=False)
        assert semiclassical.mollify(trace, 0.1).essential_sup is None

    def test_width_must_be_positive(self):
        with pytest.raises(SpectralException) as exc:
            semiclassical.mollify(step_trace(), 0.0)
        assert exc.value.error_code == SemiclassicalErrors.INVALID_TRACE
