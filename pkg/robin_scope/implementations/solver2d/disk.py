"""
The magnetic Robin Laplacian on the disk of radius R.

The operator is defined by its quadratic form

    h^2 int |(-i grad + A / h) u|^2 + h^(1 + alpha) int_{r = R} gamma |u|^2,

with the symmetric gauge A = a(r) e_theta, a(r) = r^-1 int_0^r B(rho) rho drho,
which is tangential on the circle. Radially the unknowns sit on the
staggered grid r_i = (i + 1/2) dr whose last node is R, with lumped masses
r_i dr (R dr / 2 on the boundary node); the Robin term then enters the
symmetrized matrix as 2 h^2 kappa / dr, kappa = h^(alpha - 1) gamma.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import structlog
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import eigh_tridiagonal

from robin_scope.implementations.datastructures import ProblemSpec, SpectrumResult
from robin_scope.implementations.errors import SolverErrors, SpectralException
from robin_scope.implementations.linalg import (
    gauge_shift as shift_phases,
    lowest_eigenvalues,
    peierls_ring,
)

logger = structlog.get_logger(__name__)

MIN_POINTS_PER_LENGTH = 8
DEFAULT_N_THETA = 128
REFINEMENT_TOLERANCE = 5e-3
REFINEMENT_COUNT = 10
PROBE_TOLERANCE = 0.05
# magnetic lengths of boundary layer kept by the default m range and probe annulus
LAYER_DEPTH = 6.0

Gauge = Callable[[np.ndarray, np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# problem checks and shared radial pieces
# ---------------------------------------------------------------------------

def check_problem(spec: ProblemSpec, geometry: str) -> None:
    if spec.geometry != geometry:
        raise SpectralException(SolverErrors.INVALID_PROBLEM, f"expected a {geometry} problem, got {spec.geometry}")
    for name in ("size", "h", "b"):
        if not getattr(spec, name) > 0:
            raise SpectralException(SolverErrors.INVALID_PROBLEM, f"{name} must be positive, got {getattr(spec, name)}")
    if spec.alpha < 0.5:
        raise SpectralException(SolverErrors.INVALID_PROBLEM, f"alpha must be >= 1/2, got {spec.alpha}")
    if spec.grid.points_per_length < MIN_POINTS_PER_LENGTH:
        raise SpectralException(
            SolverErrors.INVALID_PROBLEM,
            f"need at least {MIN_POINTS_PER_LENGTH} points per magnetic length, got {spec.grid.points_per_length}",
        )


def threshold_for(spec: ProblemSpec) -> float:
    """Spectra are computed completely below this value, 20% above lambda h."""
    return spec.lam * spec.h + 0.2 * spec.h * max(abs(spec.lam), spec.b)


def magnetic_length(spec: ProblemSpec) -> float:
    return math.sqrt(spec.h / spec.b)


def radial_potential(spec: ProblemSpec) -> Callable[[np.ndarray], np.ndarray]:
    """a(r) with curl(a e_theta) = B(r)."""
    if spec.field_profile is None:
        return lambda r: 0.5 * spec.b * np.asarray(r, dtype=float)
    rho = np.linspace(0.0, spec.size, 4097)
    B = np.asarray(spec.field_profile(rho), dtype=float)
    if np.min(B) < spec.b - 1e-12:
        raise SpectralException(SolverErrors.INVALID_PROBLEM, f"field profile dips below b={spec.b}")
    flux = cumulative_trapezoid(B * rho, rho, initial=0.0)

    def a(r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.interp(r, rho, flux) / np.where(r > 0, r, 1.0)

    return a


def _kappa(spec: ProblemSpec, gamma) -> np.ndarray:
    return spec.h ** (spec.alpha - 1.0) * np.asarray(gamma, dtype=float)


def _sigma(spec: ProblemSpec, kappa: np.ndarray) -> float:
    kappa_minus = max(float(np.max(-kappa)), 0.0)
    return -1.5 * spec.h ** 2 * kappa_minus ** 2 - spec.h * spec.b


class RadialGrid:
    """Staggered radial nodes on (r_in, R] with the symmetrized stiffness."""

    def __init__(self, n: int, R: float, h: float, r_in: float = 0.0):
        self.n = n
        if r_in == 0.0:
            # origin: no flux through r = 0
            self.dr = R / (n - 0.5)
            self.r = (np.arange(n) + 0.5) * self.dr
            faces = np.concatenate([[0.0], (np.arange(1, n)) * self.dr])
        else:
            # Dirichlet wall at r_in
            self.dr = (R - r_in) / n
            self.r = r_in + (np.arange(n) + 1.0) * self.dr
            faces = np.concatenate([[r_in + 0.5 * self.dr], self.r[:-1] + 0.5 * self.dr])
        self.mass = self.r * self.dr
        self.mass[-1] = 0.5 * R * self.dr
        h2 = h * h
        # faces[i] sits between node i - 1 and node i
        stiff = h2 * faces / self.dr
        k_diag = stiff.copy()
        k_diag[:-1] += stiff[1:]
        self.diag = k_diag / self.mass
        self.off = -stiff[1:] / np.sqrt(self.mass[:-1] * self.mass[1:])
        self.boundary_weight = h2 * R / self.mass[-1]

    def operator(self, potential: np.ndarray, kappa: float) -> tuple[np.ndarray, np.ndarray]:
        diag = self.diag + potential
        diag[-1] += self.boundary_weight * kappa
        return diag, self.off


def radial_nodes(spec: ProblemSpec, refine: float = 1.0) -> int:
    dr = magnetic_length(spec) / (spec.grid.points_per_length * refine)
    return int(math.ceil(spec.size / dr + 0.5))


def default_m_range(spec: ProblemSpec, a: Callable[[np.ndarray], np.ndarray]) -> tuple[int, int]:
    R = spec.size
    top = (float(a(R)) * R + LAYER_DEPTH * math.sqrt(spec.h * spec.b) * R) / spec.h
    return -spec.grid.m_margin, int(math.ceil(top)) + spec.grid.m_margin


# ---------------------------------------------------------------------------
# angular-momentum fibers
# ---------------------------------------------------------------------------

def _fiber_values(
    spec: ProblemSpec,
    grid: RadialGrid,
    a_nodes: np.ndarray,
    kappa: float,
    m: int,
    threshold: float,
) -> np.ndarray:
    potential = (spec.h * m / grid.r - a_nodes) ** 2
    diag, off = grid.operator(potential, kappa)
    floor = float(np.min(diag) - 2.0 * np.max(np.abs(off))) - 1.0
    return eigh_tridiagonal(
        diag, off, eigvals_only=True, select="v", select_range=(floor, threshold), lapack_driver="stebz"
    )


def _fiber_union(
    spec: ProblemSpec,
    grid: RadialGrid,
    m_values: range,
    threshold: float,
    threads: int,
) -> tuple[np.ndarray, np.ndarray]:
    a_nodes = radial_potential(spec)(grid.r)
    kappa = float(_kappa(spec, spec.gamma))

    def solve(m: int) -> np.ndarray:
        return _fiber_values(spec, grid, a_nodes, kappa, m, threshold)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_m = list(pool.map(solve, m_values))
    else:
        per_m = [solve(m) for m in m_values]
    values = np.concatenate([v for v in per_m] + [np.empty(0)])
    labels = np.concatenate([np.full(v.size, m) for m, v in zip(m_values, per_m)] + [np.empty(0, dtype=int)])
    order = np.argsort(values, kind="stable")
    return values[order], labels[order].astype(int)


def disk_fiber_solve(
    spec: ProblemSpec,
    m_range: Optional[tuple[int, int]] = None,
    count: Optional[int] = None,
    *,
    threads: int = 1,
    refine: float = 1.0,
) -> SpectrumResult:
    """
    Union over angular momenta m of the radial spectra below threshold.

    With ``count`` the threshold is raised until ``count`` eigenvalues are
    found and the lowest ``count`` are returned. ``labels`` holds m.
    """
    check_problem(spec, "disk")
    if not spec.gamma_is_constant:
        raise SpectralException(SolverErrors.INVALID_PROBLEM, "angular-momentum fibers need a constant gamma")
    grid = RadialGrid(radial_nodes(spec, refine), spec.size, spec.h)
    lo, hi = m_range or default_m_range(spec, radial_potential(spec))
    threshold = threshold_for(spec)

    while True:
        values, labels = _fiber_union(spec, grid, range(lo, hi + 1), threshold, threads)
        if count is None or values.size > count:
            break
        threshold += 0.5 * spec.h * spec.b

    margin = spec.grid.m_margin
    extra = list(range(lo - margin, lo)) + list(range(hi + 1, hi + margin + 1))
    added, added_m = _fiber_union(spec, grid, extra, threshold, threads)
    if added.size:
        raise SpectralException(
            SolverErrors.M_RANGE_TOO_SMALL,
            f"m range [{lo}, {hi}] misses {added.size} eigenvalues below {threshold:.6g}",
            detail={"m": sorted(set(added_m.tolist()))},
        )

    if count is not None:
        threshold = float(values[count])
        values, labels = values[:count], labels[:count]

    if spec.grid.audit_refinement and refine == 1.0:
        _refinement_audit(spec, values, (lo, hi), threads)

    logger.info(
        "solver.disk.fibers", h=spec.h, m_range=(lo, hi), n_r=grid.n, found=int(values.size), threshold=threshold
    )
    return SpectrumResult(
        eigenvalues=values,
        threshold=threshold,
        h=spec.h,
        lam=spec.lam,
        unknowns=grid.n * (hi - lo + 1),
        labels=labels,
    )


def _refinement_audit(spec: ProblemSpec, values: np.ndarray, m_range: tuple[int, int], threads: int) -> None:
    k = min(REFINEMENT_COUNT, values.size)
    if k == 0:
        return
    fine = disk_fiber_solve(spec, m_range, count=k, threads=threads, refine=2.0).eigenvalues
    rel = np.abs(fine - values[:k]) / np.maximum(np.abs(fine), spec.h * spec.b)
    if float(np.max(rel)) > REFINEMENT_TOLERANCE:
        raise SpectralException(
            SolverErrors.GRID_TOO_COARSE,
            f"radial refinement moves the lowest eigenvalues by {np.max(rel):.2e} (relative)",
            detail={"coarse": values[:k].tolist(), "fine": fine.tolist()},
        )


# ---------------------------------------------------------------------------
# full polar grid
# ---------------------------------------------------------------------------

def _boundary_samples(gamma, n_theta: int) -> np.ndarray:
    """Constant or periodic samples (uniform from theta = 0) moved onto the angular nodes."""
    if np.ndim(gamma) == 0:
        return np.full(n_theta, float(gamma))
    samples = np.asarray(gamma, dtype=float)
    src = np.arange(samples.size + 1) / samples.size
    dst = np.arange(n_theta) / n_theta
    return np.interp(dst, src, np.append(samples, samples[0]))


def polar_operator(spec: ProblemSpec, n_theta: int, gauge: Optional[Gauge] = None) -> sp.csr_matrix:
    """Symmetrized polar-grid matrix, radial-major ordering i * n_theta + k."""
    grid = RadialGrid(radial_nodes(spec), spec.size, spec.h)
    a_nodes = radial_potential(spec)(grid.r)
    dtheta = 2.0 * math.pi / n_theta
    kappa = _kappa(spec, _boundary_samples(spec.gamma, n_theta))

    S_r = sp.diags([grid.off, grid.diag, grid.off], [-1, 0, 1], format="csr")
    rings = [
        (spec.h ** 2 / (r * dtheta) ** 2) * peierls_ring(n_theta, a * r * dtheta / spec.h, order=4)
        for r, a in zip(grid.r, a_nodes)
    ]
    boundary = np.zeros(grid.n * n_theta)
    boundary[-n_theta:] = grid.boundary_weight * kappa
    H = sp.kron(S_r, sp.identity(n_theta), format="csr") + sp.block_diag(rings, format="csr") + sp.diags(boundary)
    H = H.tocsr()
    if gauge is not None:
        theta = np.arange(n_theta) * dtheta
        x = np.outer(grid.r, np.cos(theta)).ravel()
        y = np.outer(grid.r, np.sin(theta)).ravel()
        H = shift_phases(H, np.asarray(gauge(x, y), dtype=float) / spec.h)
    return H


def disk_full_solve(
    spec: ProblemSpec,
    count: int,
    n_theta: Optional[int] = None,
    gauge: Optional[Gauge] = None,
) -> SpectrumResult:
    """
    Lowest ``count`` eigenvalues of the full polar discretization.

    ``gauge`` is a scalar chi(x, y); the potential becomes A + grad chi,
    which multiplies every link by exp(i (chi_q - chi_p) / h).
    """
    check_problem(spec, "disk")
    n_theta = n_theta or spec.grid.n_theta or DEFAULT_N_THETA
    H = polar_operator(spec, n_theta, gauge)
    kappa = _kappa(spec, _boundary_samples(spec.gamma, n_theta))
    values = lowest_eigenvalues(H, count, sigma=_sigma(spec, kappa))
    logger.info("solver.disk.full", h=spec.h, unknowns=H.shape[0], lowest=float(values[0]))
    return SpectrumResult(
        eigenvalues=values,
        threshold=float(np.nextafter(values[-1], np.inf)),
        h=spec.h,
        lam=spec.lam,
        unknowns=int(H.shape[0]),
    )


# ---------------------------------------------------------------------------
# semi-boundedness probe
# ---------------------------------------------------------------------------

def _probe_bottom(spec: ProblemSpec, samples: np.ndarray, n_modes: int, n_r: int, width: float) -> float:
    R = spec.size
    grid = RadialGrid(n_r, R, spec.h, r_in=R - width)
    a_nodes = radial_potential(spec)(grid.r)
    m_center = int(round(float(radial_potential(spec)(R)) * R / spec.h))
    modes = np.arange(m_center - n_modes, m_center + n_modes + 1)

    blocks = []
    for m in modes:
        diag, off = grid.operator((spec.h * m / grid.r - a_nodes) ** 2, 0.0)
        blocks.append(sp.diags([off, diag, off], [-1, 0, 1]))
    H = sp.block_diag(blocks, format="lil").astype(complex)

    # Fourier coefficients of gamma couple the modes on the boundary node
    g_hat = np.fft.fft(samples) / samples.size
    diff = (modes[:, None] - modes[None, :]) % samples.size
    coupling = grid.boundary_weight * spec.h ** (spec.alpha - 1.0) * g_hat[diff]
    rows = np.arange(modes.size) * n_r + (n_r - 1)
    H = H.tocsr() + sp.csr_matrix(
        (coupling.ravel(), (np.repeat(rows, modes.size), np.tile(rows, modes.size))), shape=H.shape
    )
    H = 0.5 * (H + H.conj().T)
    return float(lowest_eigenvalues(H.tocsr(), 1, sigma=_sigma(spec, _kappa(spec, samples)))[0])


def form_lower_bound_probe(spec: ProblemSpec, samples: Optional[np.ndarray] = None) -> float:
    """
    Bottom of the discretized form for a rough boundary coefficient.

    The disk is cut to a boundary annulus (Dirichlet inside) and gamma acts
    through its Fourier coefficients; the value is returned from a refined
    grid after checking it moved by at most 5%.
    """
    check_problem(spec, "disk")
    R = spec.size
    samples = np.asarray(spec.gamma if samples is None else samples, dtype=float)
    if samples.ndim == 0:
        samples = np.full(2 * (spec.grid.n_theta or DEFAULT_N_THETA), float(samples))
    kappa_max = max(float(np.max(np.abs(_kappa(spec, samples)))), 1.0)
    width = spec.grid.annulus_width or min(0.5 * R, LAYER_DEPTH * magnetic_length(spec))
    dr = min(magnetic_length(spec) / spec.grid.points_per_length, 1.0 / (4.0 * kappa_max))
    n_r = int(math.ceil(width / dr))
    n_modes = min((spec.grid.n_theta or DEFAULT_N_THETA) // 2, samples.size // 4)

    coarse = _probe_bottom(spec, samples, n_modes, n_r, width)
    fine = _probe_bottom(spec, samples, min(2 * n_modes, samples.size // 2 - 1), 2 * n_r, width)
    change = abs(fine - coarse) / max(abs(fine), spec.h * spec.b)
    logger.info("solver.disk.probe", coarse=coarse, fine=fine, change=change, modes=n_modes, n_r=n_r)
    if not np.isfinite(fine) or change > PROBE_TOLERANCE:
        raise SpectralException(
            SolverErrors.GRID_TOO_COARSE,
            f"form bottom moves from {coarse:.6g} to {fine:.6g} under refinement",
            detail={"coarse": coarse, "fine": fine},
        )
    return fine
