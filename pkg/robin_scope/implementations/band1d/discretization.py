"""
Finite-difference eigenvalues of the half-line Robin oscillator.

Vertex grid t_i = i * dx (i = 0 .. n-1) with the Dirichlet node t_n = L
dropped. The Robin row comes from the ghost point u_{-1} = u_1 - 2 dx gamma u_0
and carries trapezoid mass 1/2; symmetrizing by that mass gives a real
symmetric tridiagonal matrix whose eigenvalues are found by bisection
(LAPACK ?stebz) and eigenvectors by inverse iteration (?stein).
"""
import numpy as np
import structlog
from scipy.linalg import eigh_tridiagonal

from robin_scope.implementations.datastructures import (
    HalfLineDiscretization,
    RobinOscillatorParams,
)
from robin_scope.implementations.errors import BandErrors, SpectralException

logger = structlog.get_logger(__name__)

# eigenvalues closer than this are treated as unresolved
MIN_GAP = 1e-12


def robin_tridiagonal(
    n: int,
    spacing: float,
    gamma: float,
    potential: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of -d^2/dt^2 + V with u'(0) = gamma u(0), u(n dx) = 0."""
    inv = 1.0 / (spacing * spacing)
    diag = 2.0 * inv + np.asarray(potential, dtype=float)
    diag[0] += 2.0 * gamma / spacing
    off = np.full(n - 1, -inv)
    off[0] = -np.sqrt(2.0) * inv
    return diag, off


def half_line_grid(length: float, spacing: float) -> np.ndarray:
    n = int(round(length / spacing))
    return np.arange(n) * spacing


def check_discretization(disc: HalfLineDiscretization) -> None:
    if disc.spacing <= 0.0:
        raise SpectralException(BandErrors.INVALID_DISCRETIZATION, "spacing must be positive")
    if disc.length is not None and disc.length <= 20.0 * disc.spacing:
        raise SpectralException(
            BandErrors.INVALID_DISCRETIZATION,
            f"interval length {disc.length} is too short for spacing {disc.spacing}",
        )
    if disc.scheme not in ("finite-difference", "shooting"):
        raise SpectralException(BandErrors.INVALID_DISCRETIZATION, f"unknown scheme {disc.scheme!r}")


def _solve(
    params: RobinOscillatorParams,
    count: int,
    length: float,
    spacing: float,
    vectors: bool,
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray]:
    t = half_line_grid(length, spacing)
    if t.size < count + 2:
        raise SpectralException(
            BandErrors.INVALID_DISCRETIZATION,
            f"{t.size} grid nodes cannot resolve {count} eigenvalues",
        )
    diag, off = robin_tridiagonal(t.size, spacing, params.gamma, (t - params.xi) ** 2)
    if vectors:
        w, v = eigh_tridiagonal(
            diag, off, select="i", select_range=(0, count - 1), lapack_driver="stebz"
        )
        return w, v, t
    w = eigh_tridiagonal(
        diag, off, eigvals_only=True, select="i", select_range=(0, count - 1), lapack_driver="stebz"
    )
    return w, None, t


def _resolved(
    params: RobinOscillatorParams,
    count: int,
    length: float,
    spacing: float,
    vectors: bool = False,
):
    w, v, t = _solve(params, count, length, spacing, vectors)
    if count > 1 and np.min(np.diff(w)) < MIN_GAP:
        logger.info("band.fd.refine", gamma=params.gamma, xi=params.xi, spacing=spacing)
        w, v, t = _solve(params, count, length, spacing / 2.0, vectors)
        if np.min(np.diff(w)) < MIN_GAP:
            raise SpectralException(
                BandErrors.UNRESOLVED_BAND,
                f"eigenvalues at gamma={params.gamma}, xi={params.xi} are not separated",
            )
    return w, v, t


def fd_eigenvalues(
    params: RobinOscillatorParams,
    count: int,
    disc: HalfLineDiscretization,
) -> np.ndarray:
    """Lowest ``count`` eigenvalues, Richardson-combined over spacings dx and dx/2."""
    length = disc.length_for(params.xi)
    coarse, _, _ = _resolved(params, count, length, disc.spacing)
    if not disc.richardson:
        return coarse
    fine, _, _ = _resolved(params, count, length, disc.spacing / 2.0)
    return (4.0 * fine - coarse) / 3.0


def fd_eigenvector(
    params: RobinOscillatorParams,
    j: int,
    length: float,
    spacing: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """
    Eigenvalue, grid and eigenfunction of band j at one spacing.

    Normalized in the trapezoid L^2 norm with u(0) > 0.
    """
    w, v, t = _resolved(params, j, length, spacing, vectors=True)
    vec = v[:, j - 1]
    u = vec / np.sqrt(spacing)
    u[0] *= np.sqrt(2.0)
    if u[0] < 0:
        u = -u
    return float(w[j - 1]), t, u


def robin_defect(u: np.ndarray, spacing: float, gamma: float) -> float:
    """u'(0) - gamma u(0), with u'(0) from the fourth-order one-sided stencil."""
    du = (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]) / (12.0 * spacing)
    return float(du - gamma * u[0])


def eigen_residual(
    params: RobinOscillatorParams,
    grid: np.ndarray,
    value: float,
    u: np.ndarray,
) -> float:
    """Trapezoid L^2 norm of (h - mu) u for the discrete operator on ``grid``."""
    spacing = float(grid[1] - grid[0])
    diag, off = robin_tridiagonal(grid.size, spacing, params.gamma, (grid - params.xi) ** 2)
    # back to the symmetrized coordinates, where the trapezoid norm is Euclidean
    v = u * np.sqrt(spacing)
    v[0] /= np.sqrt(2.0)
    r = (diag - value) * v
    r[:-1] += off * v[1:]
    r[1:] += off * v[:-1]
    return float(np.linalg.norm(r))
