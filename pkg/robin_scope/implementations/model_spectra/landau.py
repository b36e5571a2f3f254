"""
Landau levels on the magnetic torus and the Dirichlet square.

Both use the second-order Peierls discretization of (-i h grad + b A)^2
with the Landau gauge A = (-x2, 0) on a vertex grid of spacing d; the hop
along a link carries exp(i/h int A.dl).
"""
import math

import numpy as np
import scipy.sparse as sp
import structlog

from robin_scope.implementations.datastructures import ClusteredSpectrum, TorusModel
from robin_scope.implementations.errors import ModelErrors, SpectralException
from robin_scope.implementations.linalg import (
    eigenvalues_below,
    lowest_eigenvalues,
    split_clusters,
)

logger = structlog.get_logger(__name__)

DEFAULT_SPACING = 0.05
# eigenvalues are counted below Lambda - tolerance (the lattice sits O(d^2) below the continuum levels)
LEVEL_TOLERANCE = 1e-3


def nu_b(Lam: float, b: float = 1.0) -> float:
    """Landau-level density (b / 2 pi) #{n >= 1 : (2n - 1) b <= Lambda}."""
    if Lam < b:
        return 0.0
    levels = math.floor((Lam / b + 1.0) / 2.0 + 1e-12)
    return b * levels / (2.0 * math.pi)


def _hop_matrix(src: np.ndarray, dst: np.ndarray, phase: np.ndarray, n: int) -> sp.csr_matrix:
    return sp.csr_matrix((np.exp(1j * phase), (src, dst)), shape=(n, n))


def torus_operator(t: TorusModel, spacing: float = DEFAULT_SPACING) -> tuple[sp.csr_matrix, float]:
    """
    Lattice magnetic Laplacian on the torus of side R.

    Functions satisfy u(x + R e1) = u(x), u(x + R e2) = exp(i b R x1 / h) u(x);
    the phase closes only when b R^2 / h is a multiple of 2 pi.
    """
    if t.R <= 0 or t.h <= 0 or t.b <= 0:
        raise SpectralException(ModelErrors.INVALID_MODEL, "torus side, h and b must be positive")
    flux = t.flux_quanta
    if abs(flux - round(flux)) > 1e-9 or round(flux) < 1:
        raise SpectralException(
            ModelErrors.PHASE_MISMATCH,
            f"b R^2 / (2 pi h) = {flux:.12g} is not a positive integer",
        )
    N = max(int(round(t.R / spacing)), 8)
    d = t.R / N
    n = N * N
    i = np.tile(np.arange(N), N)
    j = np.repeat(np.arange(N), N)
    p = j * N + i

    x_dst = j * N + (i + 1) % N
    x_phase = -t.b * (j * d) * d / t.h
    y_dst = ((j + 1) % N) * N + i
    y_phase = np.where(j == N - 1, t.b * t.R * (i * d) / t.h, 0.0)

    X = _hop_matrix(p, x_dst, x_phase, n)
    Y = _hop_matrix(p, y_dst, y_phase, n)
    H = (t.h * t.h / d ** 2) * (4.0 * sp.identity(n, format="csr") - X - X.conj().T - Y - Y.conj().T)
    return H.tocsr(), d


def torus_landau_spectrum(
    t: TorusModel,
    count: int,
    spacing: float = DEFAULT_SPACING,
) -> ClusteredSpectrum:
    """Lowest ``count`` eigenvalues grouped into Landau-level clusters."""
    H, d = torus_operator(t, spacing)
    hb = t.h * t.b
    values = lowest_eigenvalues(H, count, sigma=-0.5 * hb)
    tolerance = max(10.0 * abs(values[0] - hb), 1e-8 * hb)
    centers, mult = split_clusters(values, tolerance)
    logger.info(
        "model.torus.spectrum",
        flux_quanta=round(t.flux_quanta),
        spacing=d,
        clusters=len(centers),
        lowest_multiplicity=int(mult[0]),
    )
    return ClusteredSpectrum(values=values, centers=centers, multiplicities=mult)


def periodic_count(t: TorusModel, lam: float, spacing: float = DEFAULT_SPACING) -> int:
    """N_per(lambda, R) = #{e_j <= hb (1 + lambda)}."""
    H, _ = torus_operator(t, spacing)
    level = t.h * t.b * (1.0 + lam)
    return int(eigenvalues_below(H, level * (1.0 + 1e-9), sigma=-0.5 * t.h * t.b).size)


def dirichlet_square_operator(R: float, spacing: float = DEFAULT_SPACING) -> sp.csr_matrix:
    """Lattice magnetic Laplacian (h = b = 1) on the interior nodes of [0, R]^2."""
    if R <= 0:
        raise SpectralException(ModelErrors.INVALID_MODEL, f"square side must be positive, got {R}")
    N = max(int(round(R / spacing)), 4)
    d = R / N
    M = N - 1
    n = M * M
    i = np.tile(np.arange(M), M)
    j = np.repeat(np.arange(M), M)
    p = j * M + i
    y = (j + 1) * d

    xm = i < M - 1
    X = _hop_matrix(p[xm], p[xm] + 1, -y[xm] * d, n)
    ym = j < M - 1
    Y = _hop_matrix(p[ym], p[ym] + M, np.zeros(int(ym.sum())), n)
    H = (1.0 / d ** 2) * (4.0 * sp.identity(n, format="csr") - X - X.conj().T - Y - Y.conj().T)
    return H.tocsr()


def dirichlet_square_count(
    Lam: float,
    R: float,
    spacing: float = DEFAULT_SPACING,
    level_tolerance: float = LEVEL_TOLERANCE,
) -> int:
    """#{e_j <= Lambda} for the Dirichlet magnetic Laplacian on [0, R]^2 with h = b = 1."""
    H = dirichlet_square_operator(R, spacing)
    count = int(eigenvalues_below(H, Lam - level_tolerance, sigma=0.0).size)
    logger.info("model.square.dirichlet", R=R, Lam=Lam, count=count)
    return count


def dirichlet_lower_bound(Lam: float, R: float, A: float, C: float) -> float:
    """(R - A)^2 nu_1(Lambda - C / A^2)."""
    return (R - A) ** 2 * nu_b(Lam - C / A ** 2)


def fit_cdv_constant(count: int, Lam: float, R: float, A: float) -> float:
    """Smallest C >= 0 with count >= (R - A)^2 nu_1(Lambda - C / A^2)."""
    if A <= 0 or A >= R:
        raise SpectralException(ModelErrors.INVALID_MODEL, f"need 0 < A < R, got A={A}, R={R}")
    if count >= dirichlet_lower_bound(Lam, R, A, 0.0):
        return 0.0
    allowed = math.floor(2.0 * math.pi * count / (R - A) ** 2 + 1e-12)
    # nu_1(x) <= allowed / 2 pi exactly when x < 2 allowed + 1
    return max(0.0, A * A * (Lam - 2.0 * allowed - 1.0)) + 1e-9
