"""
Band functions of the half-line Robin oscillator

    -u'' + (t - xi)^2 u = mu u on (0, inf),   u'(0) = gamma u(0).

Everything downstream (model spectra, semiclassical limits, acceptance
checks) reads eigenvalues through this module.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np
import structlog
from scipy.integrate import trapezoid
from scipy.optimize import brentq, minimize_scalar

from robin_scope.implementations.band1d.discretization import (
    check_discretization,
    eigen_residual,
    fd_eigenvalues,
    fd_eigenvector,
    robin_defect,
)
from robin_scope.implementations.band1d.shooting import shooting_eigenvalue
from robin_scope.implementations.datastructures import (
    BandTable,
    HalfLineDiscretization,
    RobinOscillatorParams,
    SampledEigenfunction,
)
from robin_scope.implementations.errors import BandErrors, SpectralException

logger = structlog.get_logger(__name__)

DEFAULT_DISCRETIZATION = HalfLineDiscretization()

# both schemes must agree to this, relative to max(1, |mu|)
VERIFY_TOLERANCE = 1e-7
# Robin row (relative to sup |u|) and eigen-residual of sampled eigenfunctions
EIGENFUNCTION_TOLERANCE = 1e-6
# monotonicity in gamma is audited up to this slack
GAMMA_MONOTONE_SLACK = 1e-9
# far-right abscissa where mu_j has reached its xi -> +inf limit
FAR_XI = 9.0


def _check_index(j: int) -> None:
    if j < 1:
        raise SpectralException(BandErrors.INVALID_DISCRETIZATION, f"band index must be >= 1, got {j}")


def mu_many(
    p: RobinOscillatorParams,
    count: int,
    disc: HalfLineDiscretization = DEFAULT_DISCRETIZATION,
) -> np.ndarray:
    """The lowest ``count`` band values at one parameter point."""
    _check_index(count)
    check_discretization(disc)
    if disc.scheme == "shooting":
        return np.array([shooting_eigenvalue(j, p, disc) for j in range(1, count + 1)])
    return fd_eigenvalues(p, count, disc)


def cross_validate(
    j: int,
    p: RobinOscillatorParams,
    disc: HalfLineDiscretization = DEFAULT_DISCRETIZATION,
) -> tuple[float, float]:
    """(finite-difference, shooting) values of mu_j; raises when they disagree."""
    _check_index(j)
    check_discretization(disc)
    fd = float(fd_eigenvalues(p, j, disc)[j - 1])
    shot = float(shooting_eigenvalue(j, p, disc))
    if abs(fd - shot) > VERIFY_TOLERANCE * max(1.0, abs(fd)):
        raise SpectralException(
            BandErrors.UNRESOLVED_BAND,
            f"mu_{j}(gamma={p.gamma}, xi={p.xi}): finite differences give {fd:.10f}, shooting {shot:.10f}",
            detail={"finite_difference": fd, "shooting": shot},
        )
    return fd, shot


def mu(
    j: int,
    p: RobinOscillatorParams,
    disc: HalfLineDiscretization = DEFAULT_DISCRETIZATION,
    *,
    verify: bool = False,
) -> float:
    """
    j-th eigenvalue mu_j(gamma, xi).

    ``verify=True`` runs both schemes and returns the finite-difference value.
    """
    _check_index(j)
    if verify:
        return cross_validate(j, p, disc)[0]
    if disc.scheme == "shooting":
        check_discretization(disc)
        return float(shooting_eigenvalue(j, p, disc))
    return float(mu_many(p, j, disc)[j - 1])


def eigenfunction(
    j: int,
    p: RobinOscillatorParams,
    disc: HalfLineDiscretization = DEFAULT_DISCRETIZATION,
) -> SampledEigenfunction:
    """
    Normalized j-th eigenfunction sampled on the coarse grid, u(0) > 0.

    The Robin row and the eigen-residual are checked on the samples; the
    boundary defect is Richardson-combined over dx and dx/2.
    """
    _check_index(j)
    check_discretization(disc)
    length = disc.length_for(p.xi)
    value, grid, values = fd_eigenvector(p, j, length, disc.spacing)
    defect = robin_defect(values, grid[1] - grid[0], p.gamma)
    residual = eigen_residual(p, grid, value, values)
    if disc.richardson:
        fine_value, fine_grid, fine_values = fd_eigenvector(p, j, length, disc.spacing / 2.0)
        fine_defect = robin_defect(fine_values, fine_grid[1] - fine_grid[0], p.gamma)
        defect = (4.0 * fine_defect - defect) / 3.0
        residual = max(residual, eigen_residual(p, fine_grid, fine_value, fine_values))
    sup = float(np.max(np.abs(values)))
    if abs(defect) > EIGENFUNCTION_TOLERANCE * sup or residual > EIGENFUNCTION_TOLERANCE:
        raise SpectralException(
            BandErrors.UNRESOLVED_BAND,
            f"eigenfunction j={j} at gamma={p.gamma}, xi={p.xi}: "
            f"Robin defect {abs(defect):.3e}, residual {residual:.3e}",
        )
    return SampledEigenfunction(grid=grid, values=values, eigenvalue=value, j=j, params=p)


def boundary_value_sq(
    j: int,
    p: RobinOscillatorParams,
    disc: HalfLineDiscretization = DEFAULT_DISCRETIZATION,
) -> float:
    """|u_j(0)|^2 of the normalized eigenfunction, checked against 4 mu + 8 gamma_-^2 + 2."""
    _check_index(j)
    check_discretization(disc)
    length = disc.length_for(p.xi)
    _, _, coarse = fd_eigenvector(p, j, length, disc.spacing)
    if disc.richardson:
        _, _, fine = fd_eigenvector(p, j, length, disc.spacing / 2.0)
        value = float((4.0 * fine[0] ** 2 - coarse[0] ** 2) / 3.0)
    else:
        value = float(coarse[0] ** 2)
    bound = 4.0 * mu(j, p, disc) + 8.0 * min(p.gamma, 0.0) ** 2 + 2.0
    if value > bound:
        raise SpectralException(
            BandErrors.BOUNDARY_BOUND_VIOLATION,
            f"u_{j}(0)^2 = {value:.6g} exceeds {bound:.6g} at gamma={p.gamma}, xi={p.xi}",
        )
    return value


def weighted_decay_norm(
    j: int,
    p: RobinOscillatorParams,
    disc: HalfLineDiscretization = DEFAULT_DISCRETIZATION,
    eps: float = 0.5,
) -> float:
    """Integral of exp(eps (t - xi)^2) (|u|^2 + |u'|^2); finite for eps < 1."""
    f = eigenfunction(j, p, disc)
    du = np.gradient(f.values, f.grid)
    weight = np.exp(eps * (f.grid - p.xi) ** 2)
    return float(trapezoid(weight * (f.values ** 2 + du ** 2), f.grid))


def truncation_audit(
    p: RobinOscillatorParams,
    disc: HalfLineDiscretization = DEFAULT_DISCRETIZATION,
) -> float:
    """Change of mu_1 when the truncation interval is doubled."""
    length = disc.length_for(p.xi)
    base = HalfLineDiscretization(spacing=disc.spacing, length=length, richardson=disc.richardson)
    doubled = HalfLineDiscretization(spacing=disc.spacing, length=2.0 * length, richardson=disc.richardson)
    return abs(mu(1, p, base) - mu(1, p, doubled))


def theta(
    gamma: float,
    j: int = 1,
    disc: HalfLineDiscretization = DEFAULT_DISCRETIZATION,
    *,
    window: tuple[float, float] = (-4.0, 6.0),
    step: float = 0.25,
) -> tuple[float, float]:
    """(min over xi of mu_j(gamma, .), argmin). The scan window is enlarged once."""

    def band(xi: float) -> float:
        return mu(j, RobinOscillatorParams(gamma=gamma, xi=xi), disc)

    lo, hi = window
    for _ in range(2):
        grid = np.arange(lo, hi + 0.5 * step, step)
        values = np.array([band(x) for x in grid])
        k = int(np.argmin(values))
        if 0 < k < grid.size - 1:
            res = minimize_scalar(
                band,
                bracket=(grid[k - 1], grid[k], grid[k + 1]),
                method="golden",
                options={"xtol": 1e-10},
            )
            logger.info("band.theta", gamma=gamma, j=j, value=float(res.fun), xi=float(res.x))
            return float(res.fun), float(res.x)
        span = hi - lo
        lo, hi = lo - 0.5 * span, hi + 0.5 * span
    raise SpectralException(
        BandErrors.NO_INTERIOR_MINIMUM,
        f"mu_{j}(gamma={gamma}, .) is monotone on [{lo}, {hi}]",
    )


def xi_limit(
    j: int,
    gamma: float,
    disc: HalfLineDiscretization = DEFAULT_DISCRETIZATION,
) -> float:
    """lim_{xi -> +inf} mu_j(gamma, xi), evaluated where the boundary no longer matters."""
    return mu(j, RobinOscillatorParams(gamma=gamma, xi=FAR_XI + math.sqrt(2.0 * j)), disc)


def xi_roots(
    j: int,
    gamma: float,
    b0: float,
    disc: HalfLineDiscretization = DEFAULT_DISCRETIZATION,
) -> tuple[float, float]:
    """The two solutions xi_- < xi_+ of mu_j(gamma, xi) = b0."""
    value, xi_min = theta(gamma, j, disc)
    if b0 <= value:
        raise SpectralException(
            BandErrors.EMPTY_INTERVAL,
            f"level {b0} does not exceed min mu_{j}(gamma={gamma}) = {value:.10f}",
        )
    limit = xi_limit(j, gamma, disc)
    if b0 >= limit:
        raise SpectralException(
            BandErrors.UNBOUNDED_SUBLEVEL,
            f"level {b0} reaches lim mu_{j}(gamma={gamma}) = {limit:.10f}",
        )

    def shifted(xi: float) -> float:
        return mu(j, RobinOscillatorParams(gamma=gamma, xi=xi), disc) - b0

    left = xi_min - 1.0
    while shifted(left) <= 0.0:
        left -= 1.0
    right = xi_min + 1.0
    while shifted(right) <= 0.0:
        right += 1.0
        if right > xi_min + 30.0:
            raise SpectralException(
                BandErrors.UNBOUNDED_SUBLEVEL,
                f"mu_{j}(gamma={gamma}, .) stays below {b0} up to xi={right}",
            )
    return (
        brentq(shifted, left, xi_min, xtol=1e-12),
        brentq(shifted, xi_min, right, xtol=1e-12),
    )


def sublevel_measure(
    j: int,
    gamma: float,
    level: float,
    disc: HalfLineDiscretization = DEFAULT_DISCRETIZATION,
) -> float:
    """Length of {xi : mu_j(gamma, xi) < level}; inf when unbounded."""
    try:
        lo, hi = xi_roots(j, gamma, level, disc)
    except SpectralException as exc:
        if exc.error_code == BandErrors.EMPTY_INTERVAL:
            return 0.0
        if exc.error_code == BandErrors.UNBOUNDED_SUBLEVEL:
            return math.inf
        raise
    return hi - lo


def audit_band_table(table: BandTable) -> None:
    if table.p_max > 1 and np.any(np.diff(table.mu, axis=0) <= 0.0):
        j, g, x = np.argwhere(np.diff(table.mu, axis=0) <= 0.0)[0]
        raise SpectralException(
            BandErrors.MONOTONICITY_VIOLATION,
            f"mu_{j + 2} <= mu_{j + 1} at gamma={table.gamma_grid[g]}, xi={table.xi_grid[x]}",
        )
    if table.gamma_grid.size > 1 and np.any(np.diff(table.mu, axis=1) < -GAMMA_MONOTONE_SLACK):
        j, g, x = np.argwhere(np.diff(table.mu, axis=1) < -GAMMA_MONOTONE_SLACK)[0]
        raise SpectralException(
            BandErrors.MONOTONICITY_VIOLATION,
            f"mu_{j + 1} decreases between gamma={table.gamma_grid[g]} and "
            f"{table.gamma_grid[g + 1]} at xi={table.xi_grid[x]}",
        )


def band_table(
    gamma_grid: Sequence[float],
    xi_grid: Sequence[float],
    p_max: int,
    disc: HalfLineDiscretization = DEFAULT_DISCRETIZATION,
    *,
    threads: int = 1,
) -> BandTable:
    """mu_j(gamma, xi) for j <= p_max on the tensor grid, audited for monotonicity."""
    _check_index(p_max)
    gammas = np.sort(np.asarray(gamma_grid, dtype=float))
    xis = np.sort(np.asarray(xi_grid, dtype=float))
    nodes = [RobinOscillatorParams(gamma=float(g), xi=float(x)) for g in gammas for x in xis]

    def solve(node: RobinOscillatorParams) -> np.ndarray:
        return mu_many(node, p_max, disc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(solve, nodes))
    else:
        values = [solve(node) for node in nodes]

    mu_arr = np.array(values).reshape(gammas.size, xis.size, p_max).transpose(2, 0, 1)
    table = BandTable(gamma_grid=gammas, xi_grid=xis, mu=np.ascontiguousarray(mu_arr), disc=disc)
    audit_band_table(table)
    logger.info(
        "band.table.built",
        gammas=int(gammas.size),
        xis=int(xis.size),
        p_max=p_max,
        scheme=disc.scheme,
    )
    return table


def save_band_table(table: BandTable, path: str | Path) -> Path:
    """Columnar text: one ``j gamma xi mu`` row per node, discretization in the header."""
    path = Path(path)
    j, g, x = np.meshgrid(
        np.arange(1, table.p_max + 1), table.gamma_grid, table.xi_grid, indexing="ij"
    )
    columns = np.column_stack([j.ravel(), g.ravel(), x.ravel(), table.mu.ravel()])
    d = table.disc
    header = (
        f"robin_scope band table spacing={d.spacing} margin={d.margin} "
        f"length={d.length} scheme={d.scheme} richardson={d.richardson}\n"
        "j gamma xi mu"
    )
    np.savetxt(path, columns, fmt=["%d", "%.12g", "%.12g", "%.15e"], header=header)
    return path


def _header_discretization(first_line: str) -> HalfLineDiscretization:
    fields = dict(item.split("=", 1) for item in first_line.lstrip("# ").split() if "=" in item)
    if not fields:
        return DEFAULT_DISCRETIZATION
    return HalfLineDiscretization(
        spacing=float(fields.get("spacing", DEFAULT_DISCRETIZATION.spacing)),
        margin=float(fields.get("margin", DEFAULT_DISCRETIZATION.margin)),
        length=None if fields.get("length", "None") == "None" else float(fields["length"]),
        scheme=fields.get("scheme", DEFAULT_DISCRETIZATION.scheme),
        richardson=fields.get("richardson", "True") == "True",
    )


def load_band_table(path: str | Path) -> BandTable:
    path = Path(path)
    with path.open() as fh:
        first = fh.readline()
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 4:
        raise SpectralException(BandErrors.TABLE_FORMAT, f"{path} has {data.shape[1]} columns, expected 4")
    js = np.unique(data[:, 0]).astype(int)
    gammas = np.unique(data[:, 1])
    xis = np.unique(data[:, 2])
    if data.shape[0] != js.size * gammas.size * xis.size or js[0] != 1 or js[-1] != js.size:
        raise SpectralException(BandErrors.TABLE_FORMAT, f"{path} does not hold a full (j, gamma, xi) grid")
    order = np.lexsort((data[:, 2], data[:, 1], data[:, 0]))
    mu_arr = data[order, 3].reshape(js.size, gammas.size, xis.size)
    return BandTable(gamma_grid=gammas, xi_grid=xis, mu=mu_arr, disc=_header_discretization(first))
