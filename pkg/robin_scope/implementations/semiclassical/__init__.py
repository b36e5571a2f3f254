"""
Semiclassical energy and counting limits.

For a boundary node x with field B = B(x) and coupling g = B^(-1/2) gamma(x)
(g = 0 when alpha > 1/2) the local density is

    D(x) = sum_p int (mu_p(g, xi) - lambda / B)_- dxi,

and the limits are

    lim h^(-1/2) E = (1 / 2 pi) int B^(3/2) D ds,
    lim h^(1/2)  N = (1 / 2 pi) int B^(1/2) sum_p |{xi : mu_p(g, xi) < lambda / B}| ds.

xi-integrals use the band table's piecewise-linear interpolant, integrated
exactly cell by cell, with a Richardson estimate from the every-other-node
grid; boundary integrals use the periodic trapezoid rule.
"""
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import structlog

from robin_scope.implementations import band1d
from robin_scope.implementations.datastructures import (
    BandTable,
    BoundaryCurve,
    FieldOnBoundary,
    LimitResult,
    RobinOscillatorParams,
    RobinTrace,
)
from robin_scope.implementations.errors import (
    SemiclassicalErrors,
    SpectralException,
)

logger = structlog.get_logger(__name__)

DEFAULT_TOLERANCE = 1e-3
WINDOW_STEP = 0.25
# sample points of the decay envelope |mu_1 - 1| <= C xi exp(-xi^2)
ENVELOPE_SAMPLES = (2.0, 2.5, 3.0, 3.5)


# ---------------------------------------------------------------------------
# exact integrals of piecewise-linear band rows
# ---------------------------------------------------------------------------

def _cells(values: np.ndarray, level: float) -> tuple[np.ndarray, np.ndarray]:
    f = level - values
    return np.maximum(f[:-1], f[1:]), np.minimum(f[:-1], f[1:])


def negative_part_integral(values: np.ndarray, grid: np.ndarray, level: float) -> float:
    """int (m - level)_- for the piecewise-linear m through (grid, values)."""
    hi, lo = _cells(values, level)
    dx = np.diff(grid)
    full = np.where(lo >= 0.0, 0.5 * dx * (hi + lo), 0.0)
    mixed = (hi > 0.0) & (lo < 0.0)
    part = np.where(mixed, 0.5 * dx * hi ** 2 / np.where(mixed, hi - lo, 1.0), 0.0)
    return float(np.sum(full + part))


def sublevel_length(values: np.ndarray, grid: np.ndarray, level: float) -> float:
    """|{m < level}| for the piecewise-linear m through (grid, values)."""
    hi, lo = _cells(values, level)
    dx = np.diff(grid)
    full = np.where((lo >= 0.0) & (hi > 0.0), dx, 0.0)
    mixed = (hi > 0.0) & (lo < 0.0)
    part = np.where(mixed, dx * hi / np.where(mixed, hi - lo, 1.0), 0.0)
    return float(np.sum(full + part))


# ---------------------------------------------------------------------------
# truncation in p and xi
# ---------------------------------------------------------------------------

def p_truncation(gamma_min: float, level: float, table: BandTable) -> int:
    """Smallest p0 with min_xi mu_{p0+1}(gamma_min, .) > level over the table window."""
    for p in range(1, table.p_max + 1):
        if float(np.min(table.row(p, gamma_min))) > level:
            return p - 1
    raise SpectralException(
        SemiclassicalErrors.TABLE_TOO_SMALL,
        f"all {table.p_max} bands dip below {level} at gamma={gamma_min}",
    )


def xi_window(gamma_range: tuple[float, float], level: float, tol: float, table: BandTable) -> float:
    """
    K such that the xi-tail of the density beyond [-K, K] is below ``tol``.

    Sublevel sets shrink as gamma grows, so the smallest gamma decides.
    """
    g = float(min(gamma_range))

    def mu1(xi: float) -> float:
        return band1d.mu(1, RobinOscillatorParams(gamma=g, xi=xi), table.disc)

    left = 0.0
    while mu1(left) <= level:
        left -= WINDOW_STEP
    K = abs(left)

    if level < 1.0 - 1e-12:
        right = 0.0
        below = 0.0
        while right < 12.0:
            right += WINDOW_STEP
            if mu1(right) < level:
                below = right
        K = max(K, below + WINDOW_STEP)
    else:
        envelope = max(abs(mu1(x) - 1.0) * math.exp(x * x) / x for x in ENVELOPE_SAMPLES)
        ratio = envelope / (2.0 * tol)
        K = max(K, math.sqrt(math.log(ratio)) if ratio > 1.0 else 0.0)
    return K


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

def _richardson(rows: list[np.ndarray], grid: np.ndarray, level: float, integrate) -> tuple[float, float]:
    fine = sum(integrate(r, grid, level) for r in rows)
    coarse = sum(integrate(r[::2], grid[::2], level) for r in rows)
    if grid.size % 2 == 0:
        # the every-other grid misses the last cell
        coarse += sum(integrate(r[-2:], grid[-2:], level) for r in rows)
    return fine + (fine - coarse) / 3.0, abs(fine - coarse) / 3.0


def _local(
    gamma_val: float,
    b_val: float,
    lam: float,
    table: BandTable,
    tol: float,
    integrate,
) -> tuple[float, float, int, float]:
    g = b_val ** -0.5 * gamma_val
    level = lam / b_val
    p0 = p_truncation(g, level, table)
    if p0 == 0:
        return 0.0, 0.0, 0, 0.0
    K = xi_window((g, g), level, tol, table)
    if table.xi_grid[0] > -K or table.xi_grid[-1] < K:
        raise SpectralException(
            SemiclassicalErrors.TABLE_TOO_SMALL,
            f"table xi range [{table.xi_grid[0]}, {table.xi_grid[-1]}] does not cover [-{K:.3f}, {K:.3f}]",
        )
    rows = [table.row(p, g) for p in range(1, p0 + 1)]
    value, error = _richardson(rows, table.xi_grid, level, integrate)
    if error > tol:
        raise SpectralException(
            SemiclassicalErrors.TABLE_TOO_SMALL,
            f"xi grid too coarse: quadrature estimate {error:.2e} exceeds {tol:.2e}",
        )
    return value, error, p0, K


def density_energy(
    gamma_val: float,
    b_val: float,
    lam: float,
    table: BandTable,
    tol: float = DEFAULT_TOLERANCE,
) -> float:
    """sum_p int (mu_p(b^(-1/2) gamma, xi) - lambda / b)_- dxi."""
    if lam > b_val:
        raise SpectralException(SemiclassicalErrors.LEVEL_ABOVE_FIELD, f"lambda={lam} exceeds b={b_val}")
    return _local(gamma_val, b_val, lam, table, tol, negative_part_integral)[0]


def density_count(
    gamma_val: float,
    b_val: float,
    lam: float,
    table: BandTable,
    tol: float = DEFAULT_TOLERANCE,
) -> float:
    """sum_p |{xi : mu_p(b^(-1/2) gamma, xi) < lambda / b}| from the table interpolant."""
    if lam >= b_val:
        raise SpectralException(SemiclassicalErrors.LEVEL_NOT_BELOW_FIELD, f"lambda={lam} is not below b={b_val}")
    return _local(gamma_val, b_val, lam, table, tol, sublevel_length)[0]


def spectral_sum(gamma: float, table: BandTable, tol: float = DEFAULT_TOLERANCE) -> float:
    """J(gamma) = sum_p int (mu_p(gamma, xi) - 1)_- dxi."""
    return density_energy(gamma, 1.0, 1.0, table, tol)


# ---------------------------------------------------------------------------
# boundary integrals
# ---------------------------------------------------------------------------

def _check_samples(curve: BoundaryCurve, field: FieldOnBoundary, trace: RobinTrace) -> None:
    n = curve.n_nodes
    if field.B_samples.size != n or trace.gamma_samples.size != n:
        raise SpectralException(
            SemiclassicalErrors.INVALID_TRACE,
            f"curve has {n} nodes, field {field.B_samples.size}, trace {trace.gamma_samples.size}",
        )
    if np.any(field.B_samples < field.b - 1e-12) or field.b <= 0:
        raise SpectralException(SemiclassicalErrors.INVALID_TRACE, "field samples must satisfy B >= b > 0")


def _node_couplings(trace: RobinTrace, alpha: float, strict: bool) -> tuple[np.ndarray, bool]:
    if alpha < 0.5:
        raise SpectralException(SemiclassicalErrors.INVALID_TRACE, f"alpha must be >= 1/2, got {alpha}")
    if not math.isclose(alpha, 0.5):
        return np.zeros_like(trace.gamma_samples), False
    if trace.essential_sup is None:
        if strict:
            raise SpectralException(
                SemiclassicalErrors.MISSING_SUP_BOUND,
                "alpha = 1/2 needs a bounded Robin coefficient",
            )
        return trace.gamma_samples, True
    return trace.gamma_samples, False


def _boundary_integral(
    curve: BoundaryCurve,
    field: FieldOnBoundary,
    gammas: np.ndarray,
    lam: float,
    table: BandTable,
    tol: float,
    integrate,
    power: float,
    threads: int,
) -> tuple[float, float, int, float]:
    pairs = np.round(np.column_stack([gammas, field.B_samples]), 12)
    unique, inverse = np.unique(pairs, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)

    def local(pair: np.ndarray) -> tuple[float, float, int, float]:
        return _local(float(pair[0]), float(pair[1]), lam, table, tol, integrate)

    rows = list(unique)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(local, rows))
    else:
        results = [local(r) for r in rows]

    dens = np.array([r[0] for r in results])[inverse]
    errs = np.array([r[1] for r in results])[inverse]
    weight = field.B_samples ** power * curve.spacing / (2.0 * math.pi)
    value = float(np.sum(weight * dens))
    coarse = float(np.sum(2.0 * weight[::2] * dens[::2])) if curve.n_nodes % 2 == 0 else value
    error = float(np.sum(weight * errs)) + abs(value - coarse)
    if not error < tol:
        raise SpectralException(
            SemiclassicalErrors.QUADRATURE_UNRESOLVED,
            f"boundary quadrature estimate {error:.2e} is not below {tol:.2e}; refine the curve nodes",
        )
    return value, error, max(r[2] for r in results), max(r[3] for r in results)


def energy_limit(
    curve: BoundaryCurve,
    field: FieldOnBoundary,
    trace: RobinTrace,
    lam: float,
    alpha: float,
    table: BandTable,
    tol: float = DEFAULT_TOLERANCE,
    *,
    strict: bool = True,
    threads: int = 1,
) -> LimitResult:
    """lim h^(-1/2) E(lambda; h), with E = sum_j (lambda h - e_j)_+."""
    _check_samples(curve, field, trace)
    if lam > field.b:
        raise SpectralException(SemiclassicalErrors.LEVEL_ABOVE_FIELD, f"lambda={lam} exceeds b={field.b}")
    gammas, unproven = _node_couplings(trace, alpha, strict)
    value, error, p0, K = _boundary_integral(
        curve, field, gammas, lam, table, tol, negative_part_integral, 1.5, threads
    )
    logger.info("semiclassical.energy_limit", lam=lam, alpha=alpha, value=value, error=error, p0=p0)
    return LimitResult(
        value=value, p_max_used=p0, K_window=K, quadrature_error_estimate=error, unproven_regime=unproven
    )


def _exact_count_density(g: float, level: float, table: BandTable) -> float:
    p0 = p_truncation(g, level, table)
    return sum(band1d.sublevel_measure(p, g, level, table.disc) for p in range(1, p0 + 1))


def count_limit(
    curve: BoundaryCurve,
    field: FieldOnBoundary,
    trace: RobinTrace,
    lam: float,
    alpha: float,
    table: BandTable,
    tol: float = DEFAULT_TOLERANCE,
    *,
    exact: bool = True,
    strict: bool = True,
    threads: int = 1,
) -> LimitResult:
    """
    lim h^(1/2) N(lambda; h), with N = #{e_j < lambda h}.

    ``exact`` takes the sublevel intervals from the band roots; otherwise
    from the table interpolant, which makes it the exact lambda-derivative
    of ``energy_limit``.
    """
    _check_samples(curve, field, trace)
    if lam >= field.b:
        raise SpectralException(SemiclassicalErrors.LEVEL_NOT_BELOW_FIELD, f"lambda={lam} is not below b={field.b}")
    gammas, unproven = _node_couplings(trace, alpha, strict)
    value, error, p0, K = _boundary_integral(
        curve, field, gammas, lam, table, tol, sublevel_length, 0.5, threads
    )
    if exact:
        pairs = np.round(np.column_stack([gammas, field.B_samples]), 12)
        unique, inverse = np.unique(pairs, axis=0, return_inverse=True)
        dens = np.array([
            _exact_count_density(float(g) * float(B) ** -0.5, lam / float(B), table) for g, B in unique
        ])[np.asarray(inverse).reshape(-1)]
        weight = field.B_samples ** 0.5 * curve.spacing / (2.0 * math.pi)
        value = float(np.sum(weight * dens))
    logger.info("semiclassical.count_limit", lam=lam, alpha=alpha, value=value, exact=exact)
    return LimitResult(
        value=value, p_max_used=p0, K_window=K, quadrature_error_estimate=error, unproven_regime=unproven
    )


def mollify(trace: RobinTrace, a: float) -> RobinTrace:
    """Periodic convolution with the normalized kernel exp(-(s/a)^2)."""
    if a <= 0:
        raise SpectralException(SemiclassicalErrors.INVALID_TRACE, f"mollifier width must be positive, got {a}")
    n = trace.gamma_samples.size
    L = trace.total_length
    s = np.arange(n) * trace.spacing
    dist = np.minimum(s, L - s)
    kernel = np.exp(-(dist / a) ** 2)
    kernel /= kernel.sum()
    smoothed = np.fft.irfft(np.fft.rfft(trace.gamma_samples) * np.fft.rfft(kernel), n)
    if trace.essential_sup is not None:
        bound = trace.essential_sup
        smoothed = np.clip(smoothed, -bound, bound)
    return RobinTrace.from_samples(smoothed, L, bounded=trace.essential_sup is not None)


def l3_distance(first: RobinTrace, second: RobinTrace) -> float:
    diff = np.abs(first.gamma_samples - second.gamma_samples)
    return float(np.sum(diff ** 3) * first.spacing) ** (1.0 / 3.0)
