import time
from typing import Optional, Sequence

import numpy as np
import structlog

from robin_scope.implementations.datastructures import (
    ConvergenceReport,
    ConvergenceRow,
    Limits,
    ProblemSpec,
    SpectrumResult,
)
from robin_scope.implementations.errors import SolverErrors, SpectralException
from robin_scope.implementations.solver2d.disk import default_m_range, disk_fiber_solve, radial_nodes, radial_potential
from robin_scope.implementations.solver2d.square import square_nodes, square_solve

logger = structlog.get_logger(__name__)

DEFAULT_BUDGET = 400_000


def energy_and_count(eigenvalues: np.ndarray, lam: float, h: float, threshold: float) -> tuple[float, int]:
    """E = sum (e_j - lambda h)_-, N = #{e_j < lambda h}."""
    level = lam * h
    if threshold <= level:
        raise SpectralException(
            SolverErrors.INCOMPLETE_SPECTRUM,
            f"spectrum is complete only below {threshold:.6g}, not above lambda h = {level:.6g}",
        )
    e = np.asarray(eigenvalues, dtype=float)
    return float(np.sum(np.clip(level - e, 0.0, None))), int(np.count_nonzero(e < level))


def energy_difference_count(eigenvalues: np.ndarray, lam: float, h: float, eps: float, threshold: float) -> float:
    """(E(lambda + eps) - E(lambda)) / (eps h), which lies in [N(lambda), N(lambda + eps)]."""
    upper, _ = energy_and_count(eigenvalues, lam + eps, h, threshold)
    lower, _ = energy_and_count(eigenvalues, lam, h, threshold)
    return (upper - lower) / (eps * h)


def count_exponent(spec: ProblemSpec) -> float:
    """Boundary states on the disk scale like h^(-1/2), the bulk Landau level on the square like h^-1."""
    return 0.5 if spec.geometry == "disk" else 1.0


def estimated_unknowns(spec: ProblemSpec) -> int:
    if spec.geometry == "disk":
        lo, hi = default_m_range(spec, radial_potential(spec))
        return radial_nodes(spec) * (hi - lo + 1)
    return (square_nodes(spec) + 1) ** 2


def solve(spec: ProblemSpec, threads: int = 1) -> SpectrumResult:
    if spec.geometry == "disk":
        return disk_fiber_solve(spec, threads=threads)
    return square_solve(spec)


def aitken(values: Sequence[float]) -> Optional[float]:
    """Aitken delta-squared estimate from the last three values."""
    if len(values) < 3:
        return None
    x0, x1, x2 = values[-3:]
    denominator = (x2 - x1) - (x1 - x0)
    if abs(denominator) < 1e-14 * max(abs(x2), 1.0):
        return float(x2)
    return float(x2 - (x2 - x1) ** 2 / denominator)


def _relative(value: float, limit: Optional[float]) -> Optional[float]:
    if limit is None or limit == 0.0:
        return None
    return abs(value - limit) / abs(limit)


def _report(rows: list[ConvergenceRow], limits: Limits, exponent: float, partial: bool) -> ConvergenceReport:
    return ConvergenceReport(
        rows=rows,
        energy_limit=limits.energy,
        count_limit=limits.count,
        count_exponent=exponent,
        extrapolated_energy=aitken([r.scaled_energy for r in rows]),
        extrapolated_count=aitken([r.scaled_count for r in rows]),
        partial=partial,
    )


def convergence_study(
    spec: ProblemSpec,
    h_list: Sequence[float],
    limits: Limits = Limits(),
    budget_unknowns: int = DEFAULT_BUDGET,
    *,
    threads: int = 1,
) -> ConvergenceReport:
    """
    Solve at every h, scale E by h^(-1/2) and N by h^exponent, and compare
    with the limits. A grid over the budget stops the study with the rows
    computed so far in the error detail.
    """
    if len(h_list) == 0:
        raise SpectralException(SolverErrors.EMPTY_H_LIST, "no semiclassical parameters given")
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise SpectralException(SolverErrors.EMPTY_H_LIST, f"h list must be strictly decreasing, got {list(h_list)}")

    exponent = count_exponent(spec)
    rows: list[ConvergenceRow] = []
    for h in h_list:
        problem = spec.with_h(h)
        unknowns = estimated_unknowns(problem)
        if unknowns > budget_unknowns:
            report = _report(rows, limits, exponent, partial=True)
            raise SpectralException(
                SolverErrors.BUDGET_EXCEEDED,
                f"h={h} needs {unknowns} unknowns, budget is {budget_unknowns}",
                detail=report,
            )
        started = time.perf_counter()
        result = solve(problem, threads)
        energy, count = energy_and_count(result.eigenvalues, problem.lam, h, result.threshold)
        scaled_energy = h ** -0.5 * energy
        scaled_count = h ** exponent * count
        rows.append(
            ConvergenceRow(
                h=h,
                energy=energy,
                count=count,
                scaled_energy=scaled_energy,
                scaled_count=scaled_count,
                energy_error=_relative(scaled_energy, limits.energy),
                count_error=_relative(scaled_count, limits.count),
                unknowns=result.unknowns,
                seconds=time.perf_counter() - started,
            )
        )
        logger.info(
            "solver.study.row", geometry=spec.geometry, h=h, scaled_energy=scaled_energy, scaled_count=scaled_count
        )
    return _report(rows, limits, exponent, partial=False)
