"""
Lieb-Thirring moments of the Robin Laplacian on the half-space,

    sum_j |e_j|^alpha  <=  2 L^cl_{alpha,d} int gamma_+^(2 alpha + d),

for -Delta on R^d x (0, inf) with d_y u = -gamma(x) u at y = 0 (no field).
"""
import math
from typing import Callable

import numpy as np
import scipy.sparse as sp
import structlog
from scipy.integrate import trapezoid
from scipy.special import gammaln

from robin_scope.implementations.band1d.discretization import robin_tridiagonal
from robin_scope.implementations.datastructures import Grid2D, LiebThirringCheck
from robin_scope.implementations.errors import ModelErrors, SpectralException
from robin_scope.implementations.linalg import eigenvalues_below

logger = structlog.get_logger(__name__)

BoundaryPotential = Callable[[np.ndarray], np.ndarray]

TRUNCATION_TOLERANCE = 0.01
ENLARGEMENT = 1.5


def lt_classical_constant(alpha: float, d: int) -> float:
    """Gamma(alpha + 1) / (2^d pi^(d/2) Gamma(1 + alpha + d/2))."""
    if alpha < 0 or d < 0:
        raise SpectralException(ModelErrors.INVALID_MODEL, f"need alpha >= 0 and d >= 0, got {alpha}, {d}")
    return math.exp(
        gammaln(alpha + 1.0) - d * math.log(2.0) - 0.5 * d * math.log(math.pi) - gammaln(1.0 + alpha + 0.5 * d)
    )


def mollified_bump(height: float, half_width: float, softness: float = 0.2) -> BoundaryPotential:
    """Smoothed indicator of [-half_width, half_width] scaled by ``height``."""

    def gamma(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 0.5 * height * (np.tanh((x + half_width) / softness) - np.tanh((x - half_width) / softness))

    return gamma


def _strip_operator(gamma: BoundaryPotential, half_length: float, depth: float, spacing: float) -> tuple[sp.csr_matrix, np.ndarray]:
    nx = int(round(2.0 * half_length / spacing))
    dx = 2.0 * half_length / nx
    x = -half_length + dx * np.arange(1, nx)
    ny = int(round(depth / spacing))
    dy = depth / ny
    g = -np.asarray(gamma(x), dtype=float)

    diag_y, off_y = robin_tridiagonal(ny, dy, 0.0, np.zeros(ny))
    Ty = sp.diags([off_y, diag_y, off_y], [-1, 0, 1], format="csr")
    m = x.size
    Dxx = sp.diags(
        [np.full(m - 1, -1.0), np.full(m, 2.0), np.full(m - 1, -1.0)], [-1, 0, 1], format="csr"
    ) / dx ** 2
    boundary = np.zeros(m * ny)
    boundary[::ny] = 2.0 * g / dy
    H = (
        sp.kron(Dxx, sp.identity(ny), format="csr")
        + sp.kron(sp.identity(m), Ty, format="csr")
        + sp.diags(boundary, format="csr")
    )
    return H.tocsr(), x


def negative_eigenvalues(gamma: BoundaryPotential, grid: Grid2D, box: tuple[float, float]) -> np.ndarray:
    """Negative eigenvalues on (-Lx, Lx) x (0, Ly), Dirichlet away from y = 0."""
    half_length, depth = box
    spacing = 2.0 * half_length / grid.n1
    H, x = _strip_operator(gamma, half_length, depth, spacing)
    g_plus = float(np.max(np.clip(gamma(x), 0.0, None)))
    return eigenvalues_below(H, 0.0, sigma=-1.5 * g_plus ** 2 - 1.0)


def lt_bound_check(
    alpha: float,
    d: int,
    gamma: float | BoundaryPotential,
    grid: Grid2D | None = None,
    box: tuple[float, float] = (6.0, 4.0),
) -> LiebThirringCheck:
    """
    Compare sum |e_j|^alpha with 2 L^cl int gamma_+^(2 alpha + d).

    d = 0 is the half-line, solved exactly; d = 1 is discretized on a box
    whose enlargement must change the moment by less than one percent.
    """
    if alpha < 0.5:
        raise SpectralException(ModelErrors.INVALID_MODEL, f"alpha must be >= 1/2, got {alpha}")
    if d == 0:
        g_plus = max(float(gamma), 0.0)
        lhs = g_plus ** (2.0 * alpha)
        rhs = 2.0 * lt_classical_constant(alpha, 0) * g_plus ** (2.0 * alpha)
        return LiebThirringCheck(alpha=alpha, dimension=0, lhs=lhs, rhs=rhs)
    if d != 1 or not callable(gamma):
        raise SpectralException(ModelErrors.INVALID_MODEL, "numeric checks support d = 0 or d = 1 with a callable gamma")

    grid = grid or Grid2D(n1=int(round(2.0 * box[0] / 0.05)), n2=int(round(box[1] / 0.05)))
    spacing = 2.0 * box[0] / grid.n1

    def moment(half_length: float, depth: float) -> float:
        n1 = int(round(2.0 * half_length / spacing))
        e = negative_eigenvalues(gamma, Grid2D(n1=n1, n2=int(round(depth / spacing))), (half_length, depth))
        return float(np.sum(np.abs(e) ** alpha))

    lhs = moment(*box)
    enlarged = moment(ENLARGEMENT * box[0], ENLARGEMENT * box[1])
    if abs(enlarged - lhs) > TRUNCATION_TOLERANCE * max(abs(lhs), 1e-12):
        raise SpectralException(
            ModelErrors.TRUNCATION_TOO_SMALL,
            f"moment changes from {lhs:.6g} to {enlarged:.6g} when the box is enlarged",
        )

    x = np.linspace(-ENLARGEMENT * box[0], ENLARGEMENT * box[0], 20001)
    integral = trapezoid(np.clip(gamma(x), 0.0, None) ** (2.0 * alpha + 1.0), x)
    rhs = 2.0 * lt_classical_constant(alpha, 1) * float(integral)
    logger.info("model.lieb_thirring", alpha=alpha, lhs=lhs, rhs=rhs)
    return LiebThirringCheck(alpha=alpha, dimension=1, lhs=lhs, rhs=rhs)
