"""Domain objects built once per run from the configuration."""
import math
from functools import cached_property
from typing import Callable, Optional

import numpy as np
import structlog

from robin_scope.implementations import band1d, geometry, model_spectra, semiclassical, solver2d
from robin_scope.implementations.datastructures import (
    BandTable,
    BoundaryCurve,
    ClusteredSpectrum,
    ConvergenceReport,
    FieldOnBoundary,
    LimitResult,
    Limits,
    ProblemSpec,
    RobinTrace,
    SolverGrid,
    SpectrumResult,
    TorusModel,
)
from robin_scope.implementations.harness.config import RunConfig

logger = structlog.get_logger(__name__)


def spike_samples(
    n: int,
    total_length: float,
    height: float,
    arc: float,
    softness: float,
    center: Optional[float] = None,
) -> np.ndarray:
    """Smoothed spike of ``height`` over an arc of length ``arc`` on a periodic boundary."""
    s = np.arange(n) * total_length / n
    center = 0.5 * total_length if center is None else center
    d = (s - center + 0.5 * total_length) % total_length - 0.5 * total_length
    return 0.5 * height * (np.tanh((d + 0.5 * arc) / softness) - np.tanh((d - 0.5 * arc) / softness))


class Workspace:
    def __init__(self, config: RunConfig):
        self.config = config
        self._memo: dict[tuple, object] = {}

    @property
    def threads(self) -> int:
        return self.config.run.threads

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.config.run.seed)

    # -- band -----------------------------------------------------------------

    @cached_property
    def table(self) -> BandTable:
        band = self.config.band
        if band.table is not None:
            return band1d.load_band_table(band.table)
        return band1d.band_table(
            band.gamma_grid, band.xi_grid, band.p_max, band.discretization, threads=self.threads
        )

    # -- boundary data --------------------------------------------------------

    @cached_property
    def curve(self) -> BoundaryCurve:
        g = self.config.geometry
        if g.shape == "ellipse":
            return geometry.ellipse(g.size, g.size * g.aspect, g.nodes)
        if g.shape == "square":
            return geometry.square(g.size, g.nodes)
        return geometry.circle(g.size, g.nodes)

    def field_profile(self) -> Optional[Callable[[np.ndarray], np.ndarray]]:
        p = self.config.physics
        if p.field_slope == 0.0:
            return None
        return lambda r: p.b + p.field_slope * np.asarray(r, dtype=float) ** 2

    def boundary_field(self, curve: Optional[BoundaryCurve] = None) -> FieldOnBoundary:
        curve = curve or self.curve
        p = self.config.physics
        profile = self.field_profile()
        if profile is None:
            return FieldOnBoundary.constant(p.b, curve.n_nodes)
        radius = np.hypot(curve.samples[:, 0], curve.samples[:, 1])
        return FieldOnBoundary(B_samples=np.asarray(profile(radius), dtype=float), b=p.b)

    def trace(self, gamma: Optional[float] = None, curve: Optional[BoundaryCurve] = None) -> RobinTrace:
        curve = curve or self.curve
        value = self.config.physics.gamma if gamma is None else gamma
        return RobinTrace.constant(value, curve.total_length, curve.n_nodes)

    # -- limits ---------------------------------------------------------------

    def energy_limit(self, lam: float, gamma: float, alpha: float) -> LimitResult:
        return semiclassical.energy_limit(
            self.curve,
            self.boundary_field(),
            self.trace(gamma),
            lam,
            alpha,
            self.table,
            self.config.tolerances.quadrature,
            threads=self.threads,
        )

    def count_limit(self, lam: float, gamma: float, alpha: float, *, exact: bool = True) -> LimitResult:
        return semiclassical.count_limit(
            self.curve,
            self.boundary_field(),
            self.trace(gamma),
            lam,
            alpha,
            self.table,
            self.config.tolerances.quadrature,
            exact=exact,
            threads=self.threads,
        )

    # -- direct problems ------------------------------------------------------

    def disk_problem(self, *, h: float, gamma: float | np.ndarray, alpha: float, lam: float, **grid) -> ProblemSpec:
        p = self.config.physics
        return ProblemSpec(
            geometry="disk",
            size=self.config.geometry.size,
            h=h,
            b=p.b,
            field_profile=self.field_profile(),
            gamma=gamma,
            alpha=alpha,
            lam=lam,
            grid=SolverGrid(points_per_length=self.config.study.points_per_length, **grid),
        )

    def square_problem(self, flux: int) -> ProblemSpec:
        """Unit-area square with h = 1 / (2 pi flux), so that T^2 = 1 / h is 2 pi flux."""
        return ProblemSpec(
            geometry="square",
            size=1.0,
            h=1.0 / (2.0 * math.pi * flux),
            b=1.0,
            lam=1.0,
            grid=SolverGrid(points_per_length=self.config.study.square_points_per_length),
        )

    def spike(self, scale: float = 1.0, n: int = 4096) -> np.ndarray:
        p = self.config.physics
        length = 2.0 * math.pi * self.config.geometry.size
        return spike_samples(n, length, scale * p.spike_height, p.spike_arc, p.spike_softness)

    # -- shared solves --------------------------------------------------------

    def memo(self, key: tuple, compute: Callable[[], object]):
        """Evaluate ``compute`` once per key; experiments and checks share the results."""
        if key not in self._memo:
            self._memo[key] = compute()
        return self._memo[key]

    def torus(self, flux: int) -> ClusteredSpectrum:
        spacing = self.config.models.torus_spacing
        return self.memo(
            ("torus", flux),
            lambda: model_spectra.torus_landau_spectrum(TorusModel.from_flux_quanta(flux), flux + 2, spacing),
        )

    def square(self, flux: int) -> SpectrumResult:
        return self.memo(("square", flux), lambda: solver2d.square_solve(self.square_problem(flux)))

    def study(self, *, gamma: float, alpha: float, lam: float, energy: bool, count: bool) -> ConvergenceReport:
        """Disk convergence study over the configured h list against the semiclassical limits."""

        def run() -> ConvergenceReport:
            problem = self.disk_problem(h=self.config.study.h_list[0], gamma=gamma, alpha=alpha, lam=lam)
            limits = Limits(
                energy=self.energy_limit(lam, gamma, alpha).value if energy else None,
                count=self.count_limit(lam, gamma, alpha).value if count else None,
            )
            return solver2d.convergence_study(
                problem, self.config.study.h_list, limits, self.config.study.budget_unknowns, threads=self.threads
            )

        return self.memo(("study", gamma, alpha, lam, energy, count), run)

    def dirichlet(self, Lam: float) -> int:
        m = self.config.models
        return self.memo(
            ("dirichlet", Lam),
            lambda: model_spectra.dirichlet_square_count(Lam, m.dirichlet_side, m.torus_spacing),
        )
