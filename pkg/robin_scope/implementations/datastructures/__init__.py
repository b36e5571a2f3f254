from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from robin_scope.implementations.errors import SemiclassicalErrors, SpectralException


@dataclass(kw_only=True, slots=True)
class Result:
    status:bool
    message:Any
    run_id:str
    criterion:str | None = None


@dataclass(kw_only=True, slots=True)
class SuccessResult:
    status:bool = field(default=True)
    message:Any = field(default=None)
    run_id:str
    criterion:str | None = None



@dataclass(kw_only=True, slots=True)
class FailedResult:
    status:bool = field(default=False)
    message:Any = field(default=None)
    run_id:str
    error_code:str
    criterion:str | None = None


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

@dataclass(kw_only=True, slots=True, frozen=True)
class BoundaryCurve:
    """
    Closed boundary curve resampled uniformly in arc length.

    ``samples`` holds the n distinct nodes M(s_i), s_i = i * spacing; the
    curve closes from the last node back to the first. Smooth curves carry
    periodic splines x(s), y(s); polygons (the square) carry none and are
    evaluated piecewise-linearly.
    """
    samples: np.ndarray
    total_length: float
    curvature_samples: np.ndarray
    counterclockwise: bool
    x_spline: Optional[CubicSpline] = None
    y_spline: Optional[CubicSpline] = None

    @property
    def n_nodes(self) -> int:
        return int(self.samples.shape[0])

    @property
    def spacing(self) -> float:
        return self.total_length / self.n_nodes

    @property
    def arc_lengths(self) -> np.ndarray:
        return np.arange(self.n_nodes) * self.spacing

    @property
    def smooth(self) -> bool:
        return self.x_spline is not None

    @property
    def closed_samples(self) -> np.ndarray:
        return np.vstack([self.samples, self.samples[:1]])


@dataclass(kw_only=True, slots=True, frozen=True)
class TubularCoords:
    curve: BoundaryCurve
    t0: float
    max_curvature: float


@dataclass(kw_only=True, slots=True, frozen=True)
class GaugeField:
    """
    Potential in boundary coordinates after normalization.

    Arrays are indexed [s_index, t_index]. ``A2`` vanishes identically,
    ``A1`` vanishes on t = 0, ``beta = A1 + B0 * t`` and ``phase`` is the
    scalar removed from the pulled-back potential.
    """
    s_grid: np.ndarray
    t_grid: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    phase: np.ndarray
    B0: float
    beta: np.ndarray
    S0: float

    @property
    def beta_ratio(self) -> float:
        """sup|beta| / (S^2 + T^2) over the window."""
        S = float(self.s_grid[-1] - self.s_grid[0])
        T = float(self.t_grid[-1])
        return float(np.max(np.abs(self.beta))) / (S * S + T * T)


# ---------------------------------------------------------------------------
# band1d
# ---------------------------------------------------------------------------

@dataclass(kw_only=True, slots=True, frozen=True)
class RobinOscillatorParams:
    gamma: float
    xi: float


@dataclass(kw_only=True, slots=True, frozen=True)
class HalfLineDiscretization:
    """
    Numerical parameters for -d^2/dt^2 + (t - xi)^2 on (0, L).

    ``length=None`` picks L = max(|xi|, 0) + margin per parameter point.
    ``scheme`` selects the finite-difference or the shooting eigenvalue
    routine; ``richardson`` combines spacings h and h/2.
    """
    spacing: float = 0.005
    length: Optional[float] = None
    margin: float = 12.0
    scheme: Literal["finite-difference", "shooting"] = "finite-difference"
    richardson: bool = True

    def length_for(self, xi: float) -> float:
        raw = self.length if self.length is not None else abs(xi) + self.margin
        step = 2.0 * self.spacing if self.richardson else self.spacing
        return float(np.ceil(raw / step - 1e-9) * step)

    def refined(self, factor: float = 0.5) -> "HalfLineDiscretization":
        return HalfLineDiscretization(
            spacing=self.spacing * factor,
            length=self.length,
            margin=self.margin,
            scheme=self.scheme,
            richardson=self.richardson,
        )


@dataclass(kw_only=True, slots=True, frozen=True)
class SampledEigenfunction:
    grid: np.ndarray
    values: np.ndarray
    eigenvalue: float
    j: int
    params: RobinOscillatorParams


@dataclass(kw_only=True, slots=True, frozen=True)
class BandTable:
    """
    mu[j - 1, gamma_index, xi_index] on a tensor grid.

    Strictly increasing in j, nondecreasing in gamma at fixed xi.
    Between nodes values are piecewise-linear in both gamma and xi.
    """
    gamma_grid: np.ndarray
    xi_grid: np.ndarray
    mu: np.ndarray
    disc: HalfLineDiscretization

    @property
    def p_max(self) -> int:
        return int(self.mu.shape[0])

    def row(self, j: int, gamma: float) -> np.ndarray:
        """Band j at coupling gamma over the whole xi grid."""
        if not 1 <= j <= self.p_max:
            raise SpectralException(
                SemiclassicalErrors.TABLE_TOO_SMALL,
                f"band {j} requested but the table holds {self.p_max}",
            )
        g = self.gamma_grid
        values = self.mu[j - 1]
        if g.size == 1:
            if abs(gamma - g[0]) > 1e-12:
                raise SpectralException(
                    SemiclassicalErrors.TABLE_TOO_SMALL,
                    f"gamma={gamma} but the table only holds gamma={g[0]}",
                )
            return values[0].copy()
        if gamma < g[0] - 1e-12 or gamma > g[-1] + 1e-12:
            raise SpectralException(
                SemiclassicalErrors.TABLE_TOO_SMALL,
                f"gamma={gamma} outside the table range [{g[0]}, {g[-1]}]",
            )
        k = int(np.clip(np.searchsorted(g, gamma) - 1, 0, g.size - 2))
        w = (gamma - g[k]) / (g[k + 1] - g[k])
        return (1.0 - w) * values[k] + w * values[k + 1]

    def interpolate(self, j: int, gamma: float, xi: float | np.ndarray) -> float | np.ndarray:
        xi_arr = np.asarray(xi, dtype=float)
        if np.any(xi_arr < self.xi_grid[0] - 1e-12) or np.any(xi_arr > self.xi_grid[-1] + 1e-12):
            raise SpectralException(
                SemiclassicalErrors.TABLE_TOO_SMALL,
                f"xi outside the table range [{self.xi_grid[0]}, {self.xi_grid[-1]}]",
            )
        out = np.interp(xi_arr, self.xi_grid, self.row(j, gamma))
        return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# model_spectra
# ---------------------------------------------------------------------------

@dataclass(kw_only=True, slots=True, frozen=True)
class HalfPlaneModel:
    h: float
    b: float
    gamma: float
    alpha: float

    @property
    def gamma_hb(self) -> float:
        return self.h ** (self.alpha - 0.5) * self.b ** (-0.5) * self.gamma


@dataclass(kw_only=True, slots=True, frozen=True)
class CylinderModel:
    """Strip (R / S Z) x (0, h^(1/2) T), Dirichlet on top, Robin (default Neumann) at t = 0."""
    h: float
    b: float
    S: float
    T: float
    gamma: float = 0.0
    alpha: float = 1.0

    @property
    def gamma_hb(self) -> float:
        return self.h ** (self.alpha - 0.5) * self.b ** (-0.5) * self.gamma

    @property
    def fiber_length(self) -> float:
        return self.T * np.sqrt(self.b)

    @property
    def height(self) -> float:
        return np.sqrt(self.h) * self.T


@dataclass(kw_only=True, slots=True, frozen=True)
class TorusModel:
    R: float
    h: float = 1.0
    b: float = 1.0

    @classmethod
    def from_flux_quanta(cls, n: int, *, h: float = 1.0, b: float = 1.0) -> "TorusModel":
        return cls(R=float(np.sqrt(2.0 * np.pi * n * h / b)), h=h, b=b)

    @property
    def flux_quanta(self) -> float:
        return self.b * self.R ** 2 / (2.0 * np.pi * self.h)


@dataclass(kw_only=True, slots=True, frozen=True)
class Grid2D:
    n1: int
    n2: int

    @property
    def unknowns(self) -> int:
        return self.n1 * self.n2


@dataclass(kw_only=True, slots=True, frozen=True)
class ClusteredSpectrum:
    values: np.ndarray
    centers: np.ndarray
    multiplicities: np.ndarray


@dataclass(kw_only=True, slots=True, frozen=True)
class LiebThirringCheck:
    alpha: float
    dimension: int
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


# ---------------------------------------------------------------------------
# semiclassical
# ---------------------------------------------------------------------------

@dataclass(kw_only=True, slots=True, frozen=True)
class FieldOnBoundary:
    """Field strength B at the boundary nodes, with b = min B over the closed domain."""
    B_samples: np.ndarray
    b: float

    @classmethod
    def constant(cls, b: float, n_nodes: int) -> "FieldOnBoundary":
        return cls(B_samples=np.full(n_nodes, float(b)), b=float(b))


@dataclass(kw_only=True, slots=True, frozen=True)
class RobinTrace:
    gamma_samples: np.ndarray
    total_length: float
    p3_norm: float
    essential_sup: Optional[float] = None

    @property
    def spacing(self) -> float:
        return self.total_length / self.gamma_samples.size

    @classmethod
    def from_samples(
        cls,
        samples: np.ndarray,
        total_length: float,
        *,
        bounded: bool = True,
    ) -> "RobinTrace":
        gamma = np.asarray(samples, dtype=float)
        if gamma.ndim != 1 or gamma.size < 2 or total_length <= 0:
            raise SpectralException(
                SemiclassicalErrors.INVALID_TRACE,
                "Robin samples must be a 1-d array of at least two nodes on a curve of positive length",
            )
        ds = total_length / gamma.size
        p3 = float(np.sum(np.abs(gamma) ** 3) * ds) ** (1.0 / 3.0)
        sup = float(np.max(np.abs(gamma))) if bounded else None
        return cls(gamma_samples=gamma, total_length=float(total_length), p3_norm=p3, essential_sup=sup)

    @classmethod
    def constant(cls, gamma: float, total_length: float, n_nodes: int) -> "RobinTrace":
        return cls.from_samples(np.full(n_nodes, float(gamma)), total_length)


@dataclass(kw_only=True, slots=True, frozen=True)
class LimitResult:
    value: float
    p_max_used: int
    K_window: float
    quadrature_error_estimate: float
    unproven_regime: bool = False


# ---------------------------------------------------------------------------
# solver2d
# ---------------------------------------------------------------------------

@dataclass(kw_only=True, slots=True, frozen=True)
class SolverGrid:
    """
    Resolution for the direct solvers.

    Spacings are set from the magnetic length (h/b)^(1/2):
    ``points_per_length`` nodes per magnetic length radially (disk) or per
    axis (square). ``n_theta`` is the angular node count of the full polar
    grid, or twice the Fourier cutoff of the boundary probe.
    """
    points_per_length: int = 48
    n_theta: Optional[int] = None
    m_margin: int = 10
    audit_refinement: bool = False
    annulus_width: Optional[float] = None


@dataclass(kw_only=True, slots=True, frozen=True)
class ProblemSpec:
    """
    One semiclassical problem on the disk (radius ``size``) or the square
    (side ``size``). ``gamma`` is a constant or samples along the boundary,
    uniform in arc length from the point (size, 0) counterclockwise.
    ``field_profile`` is B(r) for the disk; None means constant ``b``.
    """
    geometry: Literal["disk", "square"]
    size: float
    h: float
    b: float = 1.0
    field_profile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    gamma: float | np.ndarray = 0.0
    alpha: float = 1.0
    lam: float = 1.0
    grid: SolverGrid = field(default_factory=SolverGrid)

    @property
    def gamma_is_constant(self) -> bool:
        return np.ndim(self.gamma) == 0

    def with_h(self, h: float) -> "ProblemSpec":
        return ProblemSpec(
            geometry=self.geometry,
            size=self.size,
            h=h,
            b=self.b,
            field_profile=self.field_profile,
            gamma=self.gamma,
            alpha=self.alpha,
            lam=self.lam,
            grid=self.grid,
        )


@dataclass(kw_only=True, slots=True, frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    threshold: float
    h: float
    lam: float
    unknowns: int
    labels: Optional[np.ndarray] = None

    @property
    def energy(self) -> float:
        return float(np.sum(np.clip(self.lam * self.h - self.eigenvalues, 0.0, None)))

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.eigenvalues < self.lam * self.h))


@dataclass(kw_only=True, slots=True)
class ConvergenceRow:
    h: float
    energy: float
    count: int
    scaled_energy: float
    scaled_count: float
    energy_error: Optional[float]
    count_error: Optional[float]
    unknowns: int
    seconds: float


@dataclass(kw_only=True, slots=True, frozen=True)
class Limits:
    """Semiclassical values the scaled quantities are compared against."""
    energy: Optional[float] = None
    count: Optional[float] = None


@dataclass(kw_only=True, slots=True)
class ConvergenceReport:
    rows: list[ConvergenceRow]
    energy_limit: Optional[float]
    count_limit: Optional[float]
    count_exponent: float
    extrapolated_energy: Optional[float] = None
    extrapolated_count: Optional[float] = None
    partial: bool = False

    @property
    def h_list(self) -> list[float]:
        return [row.h for row in self.rows]


# ---------------------------------------------------------------------------
# harness
# ---------------------------------------------------------------------------

@dataclass(kw_only=True, slots=True)
class RunReport:
    experiment: str
    run_id: str
    config: dict[str, Any]
    results: dict[str, Any] = field(default_factory=dict)
    checks: list[SuccessResult | FailedResult] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.status for check in self.checks)
