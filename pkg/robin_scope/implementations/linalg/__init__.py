"""
Sparse Hermitian eigenvalue helpers and magnetic (Peierls) stencils shared
by the model operators and the direct solvers.
"""
import numpy as np
import scipy.sparse as sp
import structlog
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh

from robin_scope.implementations.errors import SolverErrors, SpectralException

logger = structlog.get_logger(__name__)

# below this size a dense Hermitian solve is cheaper than shift-invert Lanczos
DENSE_LIMIT = 1500
# fourth-order coefficients of -f'' on offsets 0, 1, 2
FOURTH_ORDER = (2.5, -4.0 / 3.0, 1.0 / 12.0)
SECOND_ORDER = (2.0, -1.0)


def _dense_values(H) -> np.ndarray:
    M = H.toarray() if sp.issparse(H) else np.asarray(H)
    return eigh(M, eigvals_only=True)


def lowest_eigenvalues(H, count: int, sigma: float) -> np.ndarray:
    """
    The ``count`` lowest eigenvalues of a Hermitian matrix.

    ``sigma`` must lie below the spectrum; it is lowered when a returned
    eigenvalue falls beneath it.
    """
    n = H.shape[0]
    if n <= DENSE_LIMIT or count >= n - 1:
        return _dense_values(H)[:count]
    for _ in range(8):
        vals = np.sort(eigsh(H, k=count, sigma=sigma, which="LM", return_eigenvectors=False))
        if vals[0] > sigma:
            return vals
        sigma = vals[0] - max(1.0, abs(vals[0]))
        logger.info("linalg.sigma.lowered", sigma=sigma)
    raise SpectralException(SolverErrors.INCOMPLETE_SPECTRUM, "shift could not be placed below the spectrum")


def eigenvalues_below(H, threshold: float, sigma: float, k0: int = 16) -> np.ndarray:
    """
    Every eigenvalue of H below ``threshold``.

    The number of requested eigenvalues doubles until the largest one
    returned reaches the threshold, so the list is complete.
    """
    n = H.shape[0]
    if n <= DENSE_LIMIT:
        vals = _dense_values(H)
        return vals[vals < threshold]
    k = min(k0, n - 2)
    while True:
        vals = lowest_eigenvalues(H, k, sigma)
        if vals[-1] >= threshold:
            return vals[vals < threshold]
        if k >= n - 2:
            raise SpectralException(
                SolverErrors.INCOMPLETE_SPECTRUM,
                f"all {n} eigenvalues lie below threshold {threshold}",
            )
        k = min(2 * k, n - 2)
        logger.info("linalg.eigsh.grow", k=k, threshold=threshold)


def peierls_ring(n: int, phase: float, order: int = 4) -> sp.csr_matrix:
    """
    -d^2 on a periodic ring of ``n`` nodes (unit spacing) with constant
    link phase ``phase``: the hop k -> k + m carries exp(i m phase).
    """
    coeffs = FOURTH_ORDER if order == 4 else SECOND_ORDER
    if n < 2 * len(coeffs) - 1:
        raise SpectralException(SolverErrors.INVALID_PROBLEM, f"ring of {n} nodes is too short for order {order}")
    rows, cols, data = [], [], []
    idx = np.arange(n)
    rows.append(idx)
    cols.append(idx)
    data.append(np.full(n, coeffs[0], dtype=complex))
    for m, c in enumerate(coeffs[1:], start=1):
        hop = c * np.exp(1j * m * phase)
        rows += [idx, idx]
        cols += [(idx + m) % n, (idx - m) % n]
        data += [np.full(n, hop), np.full(n, np.conj(hop))]
    return sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def gauge_shift(H: sp.spmatrix, chi: np.ndarray) -> sp.csr_matrix:
    """
    Add the gradient of chi (in units of h) to every link phase:
    H_pq -> exp(i (chi_q - chi_p)) H_pq.
    """
    coo = H.tocoo()
    data = coo.data * np.exp(1j * (chi[coo.col] - chi[coo.row]))
    return sp.csr_matrix((data, (coo.row, coo.col)), shape=H.shape)


def split_clusters(values: np.ndarray, tolerance: float) -> tuple[np.ndarray, np.ndarray]:
    """Group sorted eigenvalues whose neighbours differ by at most ``tolerance``."""
    values = np.sort(np.asarray(values))
    if values.size == 0:
        return np.empty(0), np.empty(0, dtype=int)
    breaks = np.flatnonzero(np.diff(values) > tolerance) + 1
    groups = np.split(values, breaks)
    return np.array([g.mean() for g in groups]), np.array([g.size for g in groups])
