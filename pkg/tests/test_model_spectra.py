import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robin_scope.implementations import model_spectra
from robin_scope.implementations.model_spectra import halfplane
from robin_scope.implementations.datastructures import CylinderModel, Grid2D, HalfPlaneModel, TorusModel
from robin_scope.implementations.errors import ModelErrors, SpectralException


# ============================================================================
# Landau levels
# ============================================================================

class TestLandauDensity:

    def test_below_first_level(self):
        assert model_spectra.nu_b(0.99) == 0.0

    def test_first_and_second_level(self):
        assert model_spectra.nu_b(1.0) == pytest.approx(1.0 / (2.0 * math.pi))
        assert model_spectra.nu_b(2.9) == pytest.approx(1.0 / (2.0 * math.pi))
        assert model_spectra.nu_b(3.0) == pytest.approx(2.0 / (2.0 * math.pi))

    @settings(max_examples=50, deadline=None)
    @given(
        Lam=st.floats(min_value=0.0, max_value=40.0),
        b=st.floats(min_value=0.1, max_value=5.0),
    )
    def test_step_structure(self, Lam, b):
        value = model_spectra.nu_b(Lam, b)
        levels = value * 2.0 * math.pi / b
        assert levels == pytest.approx(round(levels), abs=1e-9)
        # one level per 2b above the first
        assert levels <= (Lam / b + 1.0) / 2.0 + 1e-9
        assert levels >= (Lam / b + 1.0) / 2.0 - 1.0 - 1e-9
        assert model_spectra.nu_b(Lam + b, b) >= value


class TestTorus:

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_lowest_cluster_has_flux_multiplicity(self, n):
        spectrum = model_spectra.torus_landau_spectrum(TorusModel.from_flux_quanta(n), n + 2)
        assert spectrum.multiplicities[0] == n
        assert spectrum.centers[0] == pytest.approx(1.0, abs=5e-3)
        assert spectrum.centers[1] - spectrum.centers[0] >= 2.8

    def test_phase_must_close(self):
        with pytest.raises(SpectralException) as exc:
            model_spectra.torus_landau_spectrum(TorusModel(R=2.0), 3)
        assert exc.value.error_code == ModelErrors.PHASE_MISMATCH

    def test_periodic_count_below_second_level(self):
        assert model_spectra.periodic_count(TorusModel.from_flux_quanta(2), 1.0) == 2


class TestDirichletSquare:

    def test_nothing_below_first_level(self):
        assert model_spectra.dirichlet_square_count(1.0, 5.0) == 0

    def test_first_level_bound(self):
        count = model_spectra.dirichlet_square_count(2.9, 5.0)
        assert count <= math.floor(25.0 / (2.0 * math.pi)) + 1

    def test_fitted_constant_makes_the_bracket_hold(self):
        C = model_spectra.fit_cdv_constant(0, 2.9, 10.0, 2.0)
        assert C > 0.0
        assert model_spectra.dirichlet_lower_bound(2.9, 10.0, 2.0, C) <= 0.0

    def test_fitted_constant_is_zero_when_count_is_large(self):
        assert model_spectra.fit_cdv_constant(100, 2.9, 10.0, 2.0) == 0.0

    def test_fit_needs_a_margin_inside_the_square(self):
        with pytest.raises(SpectralException) as exc:
            model_spectra.fit_cdv_constant(1, 2.9, 2.0, 3.0)
        assert exc.value.error_code == ModelErrors.INVALID_MODEL


# ============================================================================
# Half-plane fibers and the cylinder
# ============================================================================

class TestFibers:

    def test_neumann_fiber_is_scaled_band(self):
        rows = model_spectra.fiber_spectrum(HalfPlaneModel(h=0.1, b=1.0, gamma=0.0, alpha=1.0), [0.0], 2)
        assert rows[0][0] == 1
        assert rows[0][2] == pytest.approx(0.1, abs=1e-8)
        assert rows[1][2] == pytest.approx(0.5, abs=1e-7)

    def test_alpha_below_half(self):
        with pytest.raises(SpectralException) as exc:
            model_spectra.fiber_spectrum(HalfPlaneModel(h=0.1, b=1.0, gamma=0.0, alpha=0.25), [0.0], 1)
        assert exc.value.error_code == ModelErrors.INVALID_MODEL


@pytest.mark.integration
class TestCylinder:

    @pytest.mark.parametrize("gamma,alpha", [(0.0, 1.0), (-1.0, 0.5)])
    def test_direct_matches_fibers(self, gamma, alpha):
        c = CylinderModel(h=0.1, b=1.0, S=2.0, T=3.0, gamma=gamma, alpha=alpha)
        grid = Grid2D(n1=64, n2=model_spectra.default_n_t(c))
        direct = model_spectra.cylinder_direct_spectrum(c, 12, grid)
        fiber = model_spectra.cylinder_fiber_spectrum(c, 12, grid.n2)
        rel = np.abs(direct - fiber) / np.maximum(np.abs(fiber), c.h * c.b)
        assert np.max(rel) <= 1e-3

    def test_checked_spectrum(self):
        c = CylinderModel(h=0.1, b=1.0, S=2.0, T=3.0)
        values = model_spectra.cylinder_spectrum(c, 8, Grid2D(n1=64, n2=model_spectra.default_n_t(c)))
        assert values.size == 8
        assert np.all(np.diff(values) >= 0)

    def test_negative_robin_lowers_the_bottom(self):
        neumann = CylinderModel(h=0.1, b=1.0, S=2.0, T=3.0)
        robin = CylinderModel(h=0.1, b=1.0, S=2.0, T=3.0, gamma=-1.0, alpha=0.5)
        assert model_spectra.cylinder_fiber_spectrum(robin, 1)[0] < model_spectra.cylinder_fiber_spectrum(neumann, 1)[0]

    def test_count_and_energy_from_fibers(self):
        c = CylinderModel(h=0.1, b=1.0, S=2.0, T=3.0)
        count = model_spectra.cylinder_count(c, 0.5)
        values = model_spectra.cylinder_fiber_spectrum(c, count + 1, model_spectra.default_n_t(c))
        level = c.h * c.b * 1.5
        assert np.all(values[:count] <= level)
        assert values[count] > level
        energy = model_spectra.cylinder_energy(c, 0.5)
        assert energy == pytest.approx(float(np.sum(level - values[:count])), rel=1e-10)

    def test_fibers_on_the_direct_grid_approach_the_band_functions(self):
        c = CylinderModel(h=0.1, b=1.0, S=2.0, T=3.0)
        disc = model_spectra.fiber_discretization(c, model_spectra.default_n_t(c))
        assert disc.length_for(0.0) == pytest.approx(c.fiber_length)
        on_grid = model_spectra.cylinder_fiber_spectrum(c, 8, model_spectra.default_n_t(c))
        continuum = model_spectra.cylinder_fiber_spectrum(c, 8)
        assert np.max(np.abs(on_grid - continuum) / continuum) < 5e-3

    def test_lowest_fiber_is_the_scaled_band_minimum(self):
        c = CylinderModel(h=0.1, b=1.0, S=2.0, T=3.0)
        lowest = model_spectra.cylinder_fiber_spectrum(c, 1)[0]
        # the quantized momenta sample mu_1(0, .) from above
        assert lowest >= c.h * c.b * 0.590106125 - 1e-9

    def test_oracle_gap_is_retried_on_a_finer_grid(self, monkeypatch):
        c = CylinderModel(h=0.1, b=1.0, S=2.0, T=3.0)
        direct = halfplane.cylinder_direct_spectrum
        grids = []

        def coarse_then_exact(model, count, grid):
            grids.append(grid)
            values = direct(model, count, grid)
            return values * 1.01 if len(grids) == 1 else values

        monkeypatch.setattr(halfplane, "cylinder_direct_spectrum", coarse_then_exact)
        grid = Grid2D(n1=32, n2=model_spectra.default_n_t(c))
        values = model_spectra.cylinder_spectrum(c, 4, grid)
        assert grids == [grid, Grid2D(n1=64, n2=2 * grid.n2)]
        assert values.size == 4

    def test_oracle_gap_after_refinement_is_an_error(self, monkeypatch):
        c = CylinderModel(h=0.1, b=1.0, S=2.0, T=3.0)
        monkeypatch.setattr(
            halfplane, "cylinder_direct_spectrum", lambda model, count, grid: np.full(count, 10.0)
        )
        with pytest.raises(SpectralException) as exc:
            model_spectra.cylinder_spectrum(c, 4, Grid2D(n1=16, n2=model_spectra.default_n_t(c)))
        assert exc.value.error_code == ModelErrors.GRID_TOO_COARSE
        assert exc.value.detail["n_s"] == 32

    def test_energy_needs_a_complete_spectrum(self):
        c = CylinderModel(h=0.1, b=1.0, S=2.0, T=3.0)
        with pytest.raises(SpectralException) as exc:
            model_spectra.cylinder_energy(c, 0.5, eigenvalues=np.array([0.1]), threshold=0.12)
        assert exc.value.error_code == ModelErrors.THRESHOLD_TOO_LOW

    def test_invalid_cylinder(self):
        with pytest.raises(SpectralException) as exc:
            model_spectra.cylinder_fiber_spectrum(CylinderModel(h=0.1, b=1.0, S=-1.0, T=3.0), 3)
        assert exc.value.error_code == ModelErrors.INVALID_MODEL


# ============================================================================
# Lieb-Thirring
# ============================================================================

class TestLiebThirring:

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
    def test_half_line_is_half_the_bound(self, alpha, gamma):
        check = model_spectra.lt_bound_check(alpha, 0, gamma)
        assert check.lhs == pytest.approx(0.5 * check.rhs, rel=1e-12)
        assert check.holds

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("d", [0, 1, 2, 3])
    def test_classical_constant_recursion(self, alpha, d):
        left = model_spectra.lt_classical_constant(alpha, d + 1)
        right = model_spectra.lt_classical_constant(alpha, 1) * model_spectra.lt_classical_constant(alpha + 0.5, d)
        assert left == pytest.approx(right, rel=1e-12)

    def test_classical_constant_in_one_dimension(self):
        # Gamma(2) / (2 sqrt(pi) Gamma(5/2)) = 1 / (2 sqrt(pi) * 3 sqrt(pi) / 4)
        assert model_spectra.lt_classical_constant(1.0, 1) == pytest.approx(2.0 / (3.0 * math.pi))

    def test_alpha_below_half(self):
        with pytest.raises(SpectralException) as exc:
            model_spectra.lt_bound_check(0.25, 0, 1.0)
        assert exc.value.error_code == ModelErrors.INVALID_MODEL

    @pytest.mark.slow
    @pytest.mark.parametrize("alpha", [1.0, 2.0])
    def test_strip_bump_satisfies_the_bound(self, alpha):
        bump = model_spectra.mollified_bump(2.0, 2.0)
        check = model_spectra.lt_bound_check(alpha, 1, bump)
        assert check.lhs > 0.0
        assert check.holds
        assert check.margin > 0.0
