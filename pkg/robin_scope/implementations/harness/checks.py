"""
Acceptance checks.

Each check is a Condition named after its acceptance criterion. Checks
record their measurements under ``context["results"][criterion]`` and
return a SuccessResult or a FailedResult; numerical failures inside a check
are reported as a failed check, not raised.
"""
import dataclasses
import math
from abc import abstractmethod
from typing import Any, Mapping

import numpy as np

from robin_scope.implementations import band1d, model_spectra, semiclassical, solver2d
from robin_scope.implementations.datastructures import (
    CylinderModel,
    FailedResult,
    Grid2D,
    Result,
    RobinOscillatorParams,
    SuccessResult,
)
from robin_scope.implementations.errors import HarnessErrors, SpectralException
from robin_scope.implementations.harness.templates.base import Condition
from robin_scope.implementations.harness.workspace import Workspace

FULL_ONLY = frozenset({"full"})


class AcceptanceCheck(Condition):
    error_code: str = HarnessErrors.CHECK_FAILED

    @abstractmethod
    def _evaluate(self, ws: Workspace, budget: str, data: dict[str, Any]) -> tuple[bool, str]:
        ...

    def validate(self, *, context: Mapping[str, Any], run_id: str) -> Result:
        data: dict[str, Any] = {}
        context.setdefault("results", {})[self.criterion] = data
        try:
            ok, message = self._evaluate(context["workspace"], context.get("budget", "quick"), data)
        except SpectralException as exc:
            data["error"] = exc.error_code
            return FailedResult(
                run_id=run_id,
                message=f"{exc.error_code}: {exc.message}",
                error_code=self.error_code,
                criterion=self.criterion,
            )
        if ok:
            return SuccessResult(run_id=run_id, message=message, criterion=self.criterion)
        return FailedResult(run_id=run_id, message=message, error_code=self.error_code, criterion=self.criterion)


def _strictly_decreasing(values: list[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# band functions
# ---------------------------------------------------------------------------

class SymmetryAnchorsCheck(AcceptanceCheck):
    criterion = "c01_symmetry_anchors"

    def _evaluate(self, ws, budget, data):
        tol = ws.config.tolerances
        disc = ws.config.band.discretization
        at_origin = RobinOscillatorParams(gamma=0.0, xi=0.0)
        values = band1d.mu_many(at_origin, 4, disc)
        expected = 4.0 * np.arange(1, 5) - 3.0
        mu_error = float(np.max(np.abs(values - expected)))
        u_error = abs(band1d.boundary_value_sq(1, at_origin, disc) - 2.0 / math.sqrt(math.pi))
        data.update(mu=values, mu_error=mu_error, boundary_value_error=u_error)
        ok = mu_error <= tol.anchor and u_error <= tol.boundary_value
        return ok, f"|mu_j(0,0) - (4j-3)| = {mu_error:.1e}, |u_1(0)^2 - 2/sqrt(pi)| = {u_error:.1e}"


class BandOracleCheck(AcceptanceCheck):
    criterion = "c02_band_oracle"
    # shooting is the slow side of the comparison
    QUICK_NODES = 25

    def _evaluate(self, ws, budget, data):
        tol = ws.config.tolerances
        disc = ws.config.band.discretization
        shooting = dataclasses.replace(disc, scheme="shooting")
        nodes = ws.config.band.oracle_nodes
        if budget != "full":
            nodes = min(nodes, self.QUICK_NODES)
        rng = ws.rng
        worst = 0.0
        for _ in range(nodes):
            j = int(rng.integers(1, 5))
            p = RobinOscillatorParams(gamma=float(rng.uniform(-2, 2)), xi=float(rng.uniform(-4, 6)))
            worst = max(worst, abs(band1d.mu(j, p, disc) - band1d.mu(j, p, shooting)))
        theta0, xi0 = band1d.theta(0.0, 1, disc)
        theta_fine, xi_fine = band1d.theta(0.0, 1, disc.refined())
        oracle_error = max(abs(theta0 - theta_fine), abs(xi0 - xi_fine))
        identity_error = abs(theta0 - xi0 ** 2)
        data.update(
            nodes=nodes, max_scheme_difference=worst, theta0=theta0, xi0=xi0,
            oracle_error=oracle_error, identity_error=identity_error,
        )
        ok = worst <= tol.oracle and oracle_error <= tol.oracle and identity_error <= tol.theta_identity
        return ok, (
            f"schemes differ by {worst:.1e} on {nodes} nodes; Theta0={theta0:.8f}, xi0={xi0:.8f}, "
            f"|Theta0 - xi0^2| = {identity_error:.1e}"
        )


class MonotonicityCheck(AcceptanceCheck):
    criterion = "c03_monotonicity_limits"
    SLOPE_RANGE = (-1.3, -0.7)

    def _evaluate(self, ws, budget, data):
        band1d.audit_band_table(ws.table)
        disc = ws.config.band.discretization.refined()
        xi = np.linspace(2.0, 4.0, 9)
        gap = np.array([abs(band1d.mu(1, RobinOscillatorParams(gamma=0.0, xi=x), disc) - 1.0) for x in xi])
        slope = float(np.polyfit(xi ** 2, np.log(gap), 1)[0])
        far_left = min(
            band1d.mu(1, RobinOscillatorParams(gamma=g, xi=-6.0), disc) for g in (-2.0, -1.0, 0.0, 1.0, 2.0)
        )
        data.update(decay_slope=slope, min_mu1_at_minus6=far_left)
        lo, hi = self.SLOPE_RANGE
        ok = lo <= slope <= hi and far_left > 30.0
        return ok, f"table monotone; decay slope {slope:.3f}; min mu_1(gamma, -6) = {far_left:.2f}"


# ---------------------------------------------------------------------------
# model operators
# ---------------------------------------------------------------------------

class FiberEquivalenceCheck(AcceptanceCheck):
    criterion = "c04_fiber_direct"

    def _evaluate(self, ws, budget, data):
        m = ws.config.models
        tol = ws.config.tolerances
        worst = 0.0
        for gamma in (0.0, -1.0):
            for alpha in (0.5, 1.0):
                c = CylinderModel(h=m.cylinder_h, b=1.0, S=m.cylinder_S, T=m.cylinder_T, gamma=gamma, alpha=alpha)
                grid = Grid2D(n1=m.cylinder_n_s, n2=model_spectra.default_n_t(c))
                direct = model_spectra.cylinder_direct_spectrum(c, m.cylinder_count, grid)
                fiber = model_spectra.cylinder_fiber_spectrum(c, m.cylinder_count, grid.n2)
                rel = float(np.max(np.abs(direct - fiber) / np.maximum(np.abs(fiber), c.h * c.b)))
                data[f"cylinder_gamma{gamma:g}_alpha{alpha:g}"] = rel
                worst = max(worst, rel)

        disk = ws.disk_problem(h=0.1, gamma=-1.0, alpha=0.5, lam=1.0)
        fibers = solver2d.disk_fiber_solve(disk, count=15, threads=ws.threads).eigenvalues
        full = solver2d.disk_full_solve(disk, 15).eigenvalues
        disk_rel = float(np.max(np.abs(full - fibers) / np.abs(fibers)))
        shifted = solver2d.disk_full_solve(disk, 15, gauge=lambda x, y: 0.3 * x * y + 0.1 * x ** 3).eigenvalues
        gauge_rel = float(np.max(np.abs(shifted - full) / np.maximum(np.abs(full), disk.h * disk.b)))
        data.update(cylinder_max=worst, disk_fiber_vs_full=disk_rel, gauge_shift=gauge_rel)
        ok = worst <= tol.fiber and disk_rel <= tol.disk_oracle and gauge_rel <= tol.gauge
        return ok, f"cylinder {worst:.1e}; disk fibers vs polar grid {disk_rel:.1e}; gauge {gauge_rel:.1e}"


class LiebThirringCheck(AcceptanceCheck):
    criterion = "c05_lieb_thirring"

    def _evaluate(self, ws, budget, data):
        m = ws.config.models
        exact = 0.0
        for alpha in m.lt_alphas:
            for gamma in m.lt_gammas:
                check = model_spectra.lt_bound_check(alpha, 0, gamma)
                exact = max(exact, abs(check.lhs - 0.5 * check.rhs) / check.lhs)
        recursion = 0.0
        for alpha in m.lt_alphas:
            for d in (0, 1, 2):
                left = model_spectra.lt_classical_constant(alpha, d + 1)
                right = model_spectra.lt_classical_constant(alpha, 1) * model_spectra.lt_classical_constant(alpha + 0.5, d)
                recursion = max(recursion, abs(left - right) / right)
        margins = {}
        for alpha in m.lt_bump_alphas:
            bump = model_spectra.mollified_bump(m.lt_bump_height, m.lt_bump_half_width)
            margins[f"alpha{alpha:g}"] = model_spectra.lt_bound_check(alpha, 1, bump).margin
        data.update(half_line_error=exact, recursion_error=recursion, strip_margins=margins)
        ok = exact <= 1e-12 and recursion <= 1e-12 and all(v >= 0 for v in margins.values())
        return ok, f"d=0 error {exact:.1e}; recursion {recursion:.1e}; strip margins {margins}"


class TorusLandauCheck(AcceptanceCheck):
    criterion = "c06_torus_landau"
    MIN_GAP = 2.8

    def _evaluate(self, ws, budget, data):
        m = ws.config.models
        ok = True
        for n in m.torus_flux:
            spectrum = ws.torus(n)
            multiplicity = int(spectrum.multiplicities[0])
            gap = float(spectrum.centers[1] - spectrum.centers[0]) if spectrum.centers.size > 1 else math.inf
            data[f"flux{n}"] = {"multiplicity": multiplicity, "gap": gap, "lowest": float(spectrum.centers[0])}
            ok = ok and multiplicity == n and gap >= self.MIN_GAP
        return ok, f"clusters {data}"


class DirichletSquareCheck(AcceptanceCheck):
    criterion = "c07_dirichlet_square"

    def _evaluate(self, ws, budget, data):
        m = ws.config.models
        R = m.dirichlet_side
        counts = {Lam: ws.dirichlet(Lam) for Lam in m.dirichlet_levels}
        data["counts"] = {f"{k:g}": v for k, v in counts.items()}
        ok = True
        for Lam, count in counts.items():
            if Lam <= 1.0:
                ok = ok and count == 0
            elif Lam < 3.0:
                ok = ok and count <= math.floor(R * R / (2.0 * math.pi)) + 1
        return ok, f"N(Lambda, R={R:g}) = {data['counts']}"


# ---------------------------------------------------------------------------
# convergence
# ---------------------------------------------------------------------------

class EnergyConvergenceCheck(AcceptanceCheck):
    criterion = "c08_energy_convergence"
    budgets = FULL_ONLY

    def _evaluate(self, ws, budget, data):
        tol = ws.config.tolerances
        p = ws.config.physics
        ok = True
        for name, gamma, alpha, bound in (
            ("neumann", 0.0, 1.0, tol.energy_neumann),
            ("robin", p.gamma, p.alpha, tol.energy_robin),
        ):
            report = ws.study(gamma=gamma, alpha=alpha, lam=p.lam, energy=True, count=False)
            errors = [row.energy_error for row in report.rows]
            data[name] = report
            ok = ok and _strictly_decreasing(errors) and errors[-1] <= bound
        return ok, "relative errors " + ", ".join(
            f"{k}: {[round(r.energy_error, 4) for r in v.rows]}" for k, v in data.items()
        )


class CountConvergenceCheck(AcceptanceCheck):
    criterion = "c09_count_convergence"
    budgets = FULL_ONLY

    def _evaluate(self, ws, budget, data):
        p = ws.config.physics
        report = ws.study(gamma=p.gamma, alpha=p.alpha, lam=p.count_lam, energy=False, count=True)
        errors = [row.count_error for row in report.rows]
        data["robin"] = report
        ok = _strictly_decreasing(errors) and errors[-1] <= ws.config.tolerances.count_robin
        return ok, f"relative errors of h^(1/2) N: {[round(e, 4) for e in errors]}"


class SquareCountingCheck(AcceptanceCheck):
    criterion = "c10_square_counting"
    budgets = FULL_ONLY

    def _evaluate(self, ws, budget, data):
        tol = ws.config.tolerances
        target = 1.0 / (2.0 * math.pi)
        rows = []
        for flux in ws.config.study.square_flux:
            problem = ws.square_problem(flux)
            result = ws.square(flux)
            _, count = solver2d.energy_and_count(result.eigenvalues, 1.0, problem.h, result.threshold)
            T = 1.0 / math.sqrt(problem.h)
            rows.append({
                "flux": flux, "h": problem.h, "count": count, "scaled": problem.h * count,
                "C_fit": solver2d.upper_bracket_constant(count, T), "unknowns": result.unknowns,
            })
        data["rows"] = rows
        lower = all(r["count"] >= r["flux"] for r in rows)
        c1, c2 = rows[-2]["C_fit"], rows[-1]["C_fit"]
        stable = abs(c1 - c2) <= tol.bracket * max(1.0, abs(c1), abs(c2))
        final = abs(rows[-1]["scaled"] - target) / target
        data.update(lower_bracket=lower, bracket_stable=stable, final_error=final)
        ok = lower and stable and final <= tol.square
        return ok, f"h N(bh) = {[round(r['scaled'], 4) for r in rows]}, C_fit {c1:.3f} / {c2:.3f}"


# ---------------------------------------------------------------------------
# semiclassical consistency and the form probe
# ---------------------------------------------------------------------------

class FunctionalConsistencyCheck(AcceptanceCheck):
    criterion = "c11_functional_consistency"
    LEVELS = (0.7, 0.9)
    STEP = 1e-3

    def _evaluate(self, ws, budget, data):
        p = ws.config.physics
        tol = ws.config.tolerances
        worst = 0.0
        for lam in self.LEVELS:
            up = ws.energy_limit(lam + self.STEP, p.gamma, p.alpha).value
            down = ws.energy_limit(lam - self.STEP, p.gamma, p.alpha).value
            derivative = (up - down) / (2.0 * self.STEP)
            count = ws.count_limit(lam, p.gamma, p.alpha).value
            rel = abs(derivative - count) / abs(count)
            data[f"lam{lam:g}"] = {"dE_dlam": derivative, "count": count, "relative": rel}
            worst = max(worst, rel)

        grid = ws.table.gamma_grid
        base = float(grid[np.searchsorted(grid, -0.5)]) if grid[0] <= -0.5 < grid[-1] else float(grid[0])
        cell = float(grid[np.searchsorted(grid, base) + 1] - base) if grid.size > 1 else 0.0
        J0 = semiclassical.spectral_sum(base, ws.table, tol.quadrature)
        jumps = [
            abs(semiclassical.spectral_sum(base + f * cell, ws.table, tol.quadrature) - J0)
            for f in (0.8, 0.4, 0.2, 0.1)
        ]
        data.update(spectral_sum_base=base, spectral_sum_jumps=jumps)
        ok = worst <= tol.consistency and _strictly_decreasing(jumps)
        return ok, f"dE/dlambda vs count: {worst:.2e}; |J(gamma + tau) - J(gamma)| = {[f'{j:.2e}' for j in jumps]}"


class FormProbeCheck(AcceptanceCheck):
    criterion = "c12_form_probe"

    def _evaluate(self, ws, budget, data):
        p = ws.config.physics

        def bottom(samples: np.ndarray) -> float:
            spec = ws.disk_problem(
                h=p.probe_h, gamma=samples, alpha=p.probe_alpha, lam=1.0, n_theta=512, annulus_width=0.25
            )
            return solver2d.form_lower_bound_probe(spec, samples)

        spiked = bottom(ws.spike())
        doubled = bottom(ws.spike(2.0))
        neumann = bottom(np.zeros(4096))
        data.update(spiked=spiked, doubled=doubled, neumann=neumann)
        ok = math.isfinite(spiked) and math.isfinite(doubled) and doubled < spiked and neumann >= -1e-9
        return ok, f"form bottom {spiked:.4g}, doubled spike {doubled:.4g}, gamma = 0 gives {neumann:.3g}"


class StudyTrendCheck(AcceptanceCheck):
    """Errors of the configured disk study shrink along the h list."""

    criterion = "disk_convergence_trend"

    def _evaluate(self, ws, budget, data):
        p = ws.config.physics
        tol = ws.config.tolerances
        energy_study = ws.study(gamma=p.gamma, alpha=p.alpha, lam=p.lam, energy=True, count=False)
        count_study = ws.study(gamma=p.gamma, alpha=p.alpha, lam=p.count_lam, energy=False, count=True)
        energy = [row.energy_error for row in energy_study.rows]
        count = [row.count_error for row in count_study.rows]
        bound = tol.energy_neumann if p.gamma == 0.0 else tol.energy_robin
        data.update(energy_errors=energy, count_errors=count, energy_bound=bound)
        ok = _strictly_decreasing(energy) and _strictly_decreasing(count) and energy[-1] <= bound
        return ok, f"energy errors {[round(e, 4) for e in energy]}, count errors {[round(e, 4) for e in count]}"


# ---------------------------------------------------------------------------
# regression
# ---------------------------------------------------------------------------

class SnapshotCheck(AcceptanceCheck):
    criterion = "snapshot_regression"
    error_code = HarnessErrors.SNAPSHOT_MISMATCH

    def _evaluate(self, ws, budget, data):
        path = ws.config.run.snapshot
        if path is None:
            data["skipped"] = True
            return True, "no snapshot configured"
        snapshot = band1d.load_band_table(path)
        fresh = band1d.band_table(
            snapshot.gamma_grid, snapshot.xi_grid, snapshot.p_max, snapshot.disc, threads=ws.threads
        )
        diff = np.abs(fresh.mu - snapshot.mu)
        j, g, x = np.unravel_index(int(np.argmax(diff)), diff.shape)
        worst = float(diff[j, g, x])
        data.update(path=path, max_difference=worst)
        if worst <= ws.config.tolerances.snapshot:
            return True, f"{path}: max difference {worst:.1e}"
        return False, (
            f"{path}: j={j + 1} gamma={snapshot.gamma_grid[g]:g} xi={snapshot.xi_grid[x]:g}: "
            f"snapshot {snapshot.mu[j, g, x]:.12g} vs computed {fresh.mu[j, g, x]:.12g}"
        )


ALL_CHECKS: tuple[type[AcceptanceCheck], ...] = (
    SymmetryAnchorsCheck,
    BandOracleCheck,
    MonotonicityCheck,
    FiberEquivalenceCheck,
    LiebThirringCheck,
    TorusLandauCheck,
    DirichletSquareCheck,
    EnergyConvergenceCheck,
    CountConvergenceCheck,
    SquareCountingCheck,
    FunctionalConsistencyCheck,
    FormProbeCheck,
    SnapshotCheck,
)


def suite(budget: str) -> list[AcceptanceCheck]:
    return [check() for check in ALL_CHECKS if budget in check.budgets]
