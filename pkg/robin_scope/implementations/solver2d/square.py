"""
Neumann magnetic Laplacian on the square [0, L]^2.

Vertex grid with trapezoid masses, Landau gauge A = (-b x2, 0) (tangential
on all four edges), so the x-links carry exp(-i b x2 d / h) and the y-links
carry no phase.
"""
import math

import numpy as np
import scipy.sparse as sp
import structlog

from robin_scope.implementations.datastructures import ProblemSpec, SpectrumResult
from robin_scope.implementations.errors import SolverErrors, SpectralException
from robin_scope.implementations.linalg import eigenvalues_below
from robin_scope.implementations.solver2d.disk import check_problem, magnetic_length, threshold_for

logger = structlog.get_logger(__name__)


def square_nodes(spec: ProblemSpec) -> int:
    """Cells per side."""
    return int(math.ceil(spec.size * spec.grid.points_per_length / magnetic_length(spec)))


def _neumann_stiffness(n: int, d: float, phase: float) -> sp.csr_matrix:
    degree = np.full(n + 1, 2.0)
    degree[[0, -1]] = 1.0
    hop = np.full(n, -np.exp(1j * phase))
    return sp.diags([np.conj(hop), degree.astype(complex), hop], [-1, 0, 1], format="csr") / d


def square_operator(spec: ProblemSpec) -> tuple[sp.csr_matrix, float]:
    """Symmetrized M^(-1/2) K M^(-1/2), x-fastest ordering j * (n + 1) + i; returns (H, spacing)."""
    n = square_nodes(spec)
    d = spec.size / n
    h2 = spec.h * spec.h
    w = np.full(n + 1, d)
    w[[0, -1]] = 0.5 * d
    y = np.arange(n + 1) * d

    x_links = sp.block_diag(
        [wj * _neumann_stiffness(n, d, -spec.b * yj * d / spec.h) for wj, yj in zip(w, y)], format="csr"
    )
    y_links = sp.kron(_neumann_stiffness(n, d, 0.0), sp.diags(w), format="csr")
    K = h2 * (x_links + y_links)
    scale = sp.diags(1.0 / np.sqrt(np.kron(w, w)))
    H = scale @ K @ scale
    return (0.5 * (H + H.conj().T)).tocsr(), d


def square_solve(spec: ProblemSpec, count: int | None = None) -> SpectrumResult:
    """Every eigenvalue below the threshold (or the lowest ``count``)."""
    check_problem(spec, "square")
    if not spec.gamma_is_constant or float(spec.gamma) != 0.0 or spec.field_profile is not None:
        raise SpectralException(
            SolverErrors.INVALID_PROBLEM, "the square solver handles the Neumann problem with constant field"
        )
    H, d = square_operator(spec)
    threshold = threshold_for(spec)
    while True:
        values = eigenvalues_below(H, threshold, sigma=0.0)
        if count is None or values.size > count:
            break
        threshold += 0.5 * spec.h * spec.b
    if count is not None:
        threshold = float(values[count])
        values = values[:count]
    logger.info("solver.square", h=spec.h, unknowns=H.shape[0], spacing=d, found=int(values.size))
    return SpectrumResult(
        eigenvalues=values, threshold=threshold, h=spec.h, lam=spec.lam, unknowns=int(H.shape[0])
    )


def upper_bracket_constant(count: int, T: float) -> float:
    """C with count = T^2 / (2 pi) + C T."""
    return (count - T * T / (2.0 * math.pi)) / T
