"""
Half-plane fibers and the magnetic cylinder (R / S Z) x (0, h^(1/2) T).

Gauge bA = (-b t, 0): the s-Fourier mode exp(i k s) sees the potential
(h k - b t)^2, which after t = (h/b)^(1/2) tau is hb (xi - tau)^2 with
xi = k (h/b)^(1/2). The Robin condition at t = 0 reads
d_t u = h^(alpha - 1) gamma u.
"""
import math
from typing import Callable

import numpy as np
import scipy.sparse as sp
import structlog
from scipy.linalg import eigh_tridiagonal

from robin_scope.implementations import band1d
from robin_scope.implementations.band1d.discretization import robin_tridiagonal
from robin_scope.implementations.datastructures import (
    CylinderModel,
    Grid2D,
    HalfLineDiscretization,
    HalfPlaneModel,
    RobinOscillatorParams,
)
from robin_scope.implementations.errors import ModelErrors, SpectralException
from robin_scope.implementations.linalg import lowest_eigenvalues, peierls_ring

logger = structlog.get_logger(__name__)

# nodes per magnetic length (h/b)^(1/2) across the strip
T_POINTS_PER_LENGTH = 32
ORACLE_TOLERANCE = 1e-3


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0.0:
            raise SpectralException(ModelErrors.INVALID_MODEL, f"{name} must be positive, got {value}")


def fiber_spectrum(
    m: HalfPlaneModel,
    xi_grid,
    p_max: int,
    disc: HalfLineDiscretization = band1d.DEFAULT_DISCRETIZATION,
) -> list[tuple[int, float, float]]:
    """(j, xi, hb mu_j(gamma_{h,b}, xi)) for every j <= p_max and xi in the grid."""
    _check_positive(h=m.h, b=m.b)
    if m.alpha < 0.5:
        raise SpectralException(ModelErrors.INVALID_MODEL, f"alpha must be >= 1/2, got {m.alpha}")
    hb = m.h * m.b
    out: list[tuple[int, float, float]] = []
    for xi in np.asarray(xi_grid, dtype=float):
        values = band1d.mu_many(RobinOscillatorParams(gamma=m.gamma_hb, xi=float(xi)), p_max, disc)
        out.extend((j, float(xi), hb * float(v)) for j, v in enumerate(values, start=1))
    return out


# ---------------------------------------------------------------------------
# cylinder
# ---------------------------------------------------------------------------

def _check_cylinder(c: CylinderModel) -> None:
    _check_positive(h=c.h, b=c.b, S=c.S, T=c.T)
    if c.alpha < 0.5:
        raise SpectralException(ModelErrors.INVALID_MODEL, f"alpha must be >= 1/2, got {c.alpha}")


def default_n_t(c: CylinderModel) -> int:
    return int(math.ceil(T_POINTS_PER_LENGTH * c.fiber_length))


def _t_operator(c: CylinderModel, n_t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """h^2 (-d_t^2) with the Robin row, symmetrized; returns (diag, off, t nodes)."""
    dt = c.height / n_t
    kappa = c.h ** (c.alpha - 1.0) * c.gamma
    diag, off = robin_tridiagonal(n_t, dt, kappa, np.zeros(n_t))
    h2 = c.h * c.h
    return h2 * diag, h2 * off, np.arange(n_t) * dt


def _form_lower_bound(c: CylinderModel) -> float:
    kappa_minus = max(-(c.h ** (c.alpha - 1.0)) * c.gamma, 0.0)
    return -c.h * c.h * kappa_minus ** 2 - c.h * c.b


def _modes_below(c: CylinderModel, values: Callable[[int], np.ndarray]) -> np.ndarray:
    """Collect the mode values of every momentum 2 pi n / S, walking n outwards from 0."""
    well_top = c.b * c.height
    found = [values(0)]
    n = 1
    while True:
        v = values(n)
        if v.size == 0 and c.h * 2.0 * math.pi * n / c.S > well_top:
            break
        found.append(v)
        n += 1
    n = -1
    while True:
        v = values(n)
        if v.size == 0:
            break
        found.append(v)
        n -= 1
    return np.sort(np.concatenate(found))


def _fiber_values_below(c: CylinderModel, cutoff: float, n_t: int) -> np.ndarray:
    diag, off, t = _t_operator(c, n_t)
    floor = _form_lower_bound(c)

    def values(n: int) -> np.ndarray:
        k = 2.0 * math.pi * n / c.S
        potential = (c.h * k - c.b * t) ** 2
        return eigh_tridiagonal(
            diag + potential, off, eigvals_only=True, select="v",
            select_range=(floor, cutoff), lapack_driver="stebz",
        )

    return _modes_below(c, values)


def fiber_discretization(c: CylinderModel, n_t: int | None = None) -> HalfLineDiscretization:
    """
    Half-line discretization of the rescaled fiber on (0, T b^(1/2)).

    With ``n_t`` the fiber uses the same t-nodes as a direct solve with
    ``n_t`` rows and no Richardson step; without it the default spacing
    is shrunk until the interval holds an even number of steps.
    """
    length = c.fiber_length
    if n_t is not None:
        return HalfLineDiscretization(spacing=length / n_t, length=length, richardson=False)
    steps = 2 * math.ceil(length / (2.0 * band1d.DEFAULT_DISCRETIZATION.spacing))
    return HalfLineDiscretization(spacing=length / steps, length=length)


def _band_values_below(c: CylinderModel, cutoff: float, disc: HalfLineDiscretization) -> np.ndarray:
    hb = c.h * c.b
    scale = math.sqrt(c.h / c.b)
    nodes = int(round(disc.length_for(0.0) / disc.spacing))

    def values(n: int) -> np.ndarray:
        p = RobinOscillatorParams(gamma=c.gamma_hb, xi=2.0 * math.pi * n / c.S * scale)
        count = 4
        while True:
            count = min(count, nodes - 2)
            mus = hb * band1d.mu_many(p, count, disc)
            if mus[-1] > cutoff or count == nodes - 2:
                return mus[mus <= cutoff]
            count *= 2

    return _modes_below(c, values)


def cylinder_fiber_spectrum(c: CylinderModel, count: int, n_t: int | None = None) -> np.ndarray:
    """
    Lowest ``count`` eigenvalues hb mu_j(gamma_{h,b}, k (h/b)^(1/2)) over the
    quantized momenta k = 2 pi n / S, read from the band functions.
    """
    _check_cylinder(c)
    disc = fiber_discretization(c, n_t)
    cutoff = 3.0 * c.h * c.b
    while True:
        vals = _band_values_below(c, cutoff, disc)
        if vals.size >= count:
            return vals[:count]
        cutoff *= 2.0


def cylinder_direct_spectrum(c: CylinderModel, count: int, grid: Grid2D) -> np.ndarray:
    """
    Lowest eigenvalues of the two-dimensional discretization: a
    fourth-order Peierls ring in s on every t-row, the Robin t-operator
    coupling the rows.
    """
    _check_cylinder(c)
    n_s, n_t = grid.n1, grid.n2
    diag, off, t = _t_operator(c, n_t)
    ds = c.S / n_s
    T_op = sp.diags([off, diag, off], [-1, 0, 1], format="csr")
    rings = [
        (c.h * c.h / ds ** 2) * peierls_ring(n_s, -c.b * ti * ds / c.h, order=4) for ti in t
    ]
    H = sp.kron(T_op, sp.identity(n_s), format="csr") + sp.block_diag(rings, format="csr")
    vals = lowest_eigenvalues(H, count, sigma=_form_lower_bound(c))
    logger.info("model.cylinder.direct", unknowns=n_s * n_t, lowest=float(vals[0]))
    return vals


def _oracle_gap(c: CylinderModel, count: int, grid: Grid2D) -> tuple[np.ndarray, np.ndarray, float]:
    direct = cylinder_direct_spectrum(c, count, grid)
    oracle = cylinder_fiber_spectrum(c, count, grid.n2)
    rel = np.abs(direct - oracle) / np.maximum(np.abs(oracle), c.h * c.b)
    return direct, oracle, float(np.max(rel))


def cylinder_spectrum(c: CylinderModel, count: int, grid: Grid2D) -> np.ndarray:
    """
    Direct eigenvalues, checked against the band-function fibers on the
    same t-grid. A failed check is retried once on a grid refined in both
    directions.
    """
    direct, oracle, gap = _oracle_gap(c, count, grid)
    if gap > ORACLE_TOLERANCE:
        logger.info("model.cylinder.refine", n_s=grid.n1, n_t=grid.n2, gap=gap)
        grid = Grid2D(n1=2 * grid.n1, n2=2 * grid.n2)
        direct, oracle, gap = _oracle_gap(c, count, grid)
    if gap > ORACLE_TOLERANCE:
        raise SpectralException(
            ModelErrors.GRID_TOO_COARSE,
            f"direct and fiber spectra differ by {gap:.2e} (relative)",
            detail={"direct": direct.tolist(), "fiber": oracle.tolist(), "n_s": grid.n1, "n_t": grid.n2},
        )
    return direct


def cylinder_energy(
    c: CylinderModel,
    lam: float,
    eigenvalues: np.ndarray | None = None,
    threshold: float | None = None,
    n_t: int | None = None,
) -> float:
    """sum_j (hb (1 + lambda) - e_j)_+ ; computed from the fibers unless a spectrum is given."""
    _check_cylinder(c)
    level = c.h * c.b * (1.0 + lam)
    if eigenvalues is None:
        eigenvalues = _fiber_values_below(c, level, n_t or default_n_t(c))
    elif threshold is None or threshold < level:
        raise SpectralException(
            ModelErrors.THRESHOLD_TOO_LOW,
            f"spectrum threshold {threshold} is below hb(1 + lambda) = {level}",
        )
    e = np.asarray(eigenvalues)
    return float(np.sum(np.clip(level - e, 0.0, None)))


def cylinder_count(c: CylinderModel, lam: float, n_t: int | None = None) -> int:
    """#{e_j <= hb (1 + lambda)}."""
    _check_cylinder(c)
    level = c.h * c.b * (1.0 + lam)
    return int(_fiber_values_below(c, level, n_t or default_n_t(c)).size)
