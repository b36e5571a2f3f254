"""
Shooting cross-check for the half-line Robin oscillator.

The solution with u(0) = 1, u'(0) = gamma is integrated forward to L. Its
number of sign changes on (0, L] counts the Dirichlet-truncated eigenvalues
below mu; bisection on that count isolates band j and Brent's method on
u(L; mu) polishes it.
"""
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from robin_scope.implementations.datastructures import (
    HalfLineDiscretization,
    RobinOscillatorParams,
)
from robin_scope.implementations.errors import BandErrors, SpectralException

RTOL = 1e-11
ATOL = 1e-12
NODE_SAMPLE_STEP = 0.02
MAX_BISECTIONS = 200


def shooting_length(params: RobinOscillatorParams, disc: HalfLineDiscretization) -> float:
    # for xi < 0 the well sits left of the boundary and the potential already exceeds xi^2 at t = 0
    if disc.length is not None:
        return disc.length
    return max(params.xi, 0.0) + disc.margin


def _shoot(mu: float, params: RobinOscillatorParams, length: float, t_eval=None):
    xi = params.xi

    def rhs(t, y):
        return (y[1], ((t - xi) ** 2 - mu) * y[0])

    return solve_ivp(
        rhs,
        (0.0, length),
        (1.0, params.gamma),
        method="DOP853",
        rtol=RTOL,
        atol=ATOL,
        t_eval=t_eval,
    )


def node_count(mu: float, params: RobinOscillatorParams, length: float) -> int:
    samples = np.linspace(0.0, length, int(length / NODE_SAMPLE_STEP) + 1)
    u = _shoot(mu, params, length, t_eval=samples).y[0]
    signs = np.sign(u)
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def endpoint_value(mu: float, params: RobinOscillatorParams, length: float) -> float:
    return float(_shoot(mu, params, length).y[0, -1])


def shooting_eigenvalue(j: int, params: RobinOscillatorParams, disc: HalfLineDiscretization) -> float:
    length = shooting_length(params, disc)
    gamma_minus = max(-params.gamma, 0.0)
    lo = -gamma_minus ** 2 - 1.0
    hi = lo + params.xi ** 2 + 4.0 * j + 4.0
    count_lo = node_count(lo, params, length)
    if count_lo != 0:
        raise SpectralException(
            BandErrors.UNRESOLVED_BAND,
            f"shooting found {count_lo} eigenvalues below the form lower bound",
        )
    count_hi = node_count(hi, params, length)
    while count_hi < j:
        hi = lo + 2.0 * (hi - lo)
        count_hi = node_count(hi, params, length)

    for _ in range(MAX_BISECTIONS):
        if count_lo == j - 1 and count_hi == j:
            break
        mid = 0.5 * (lo + hi)
        c = node_count(mid, params, length)
        if c >= j:
            hi, count_hi = mid, c
        else:
            lo, count_lo = mid, c
    else:
        raise SpectralException(
            BandErrors.UNRESOLVED_BAND,
            f"could not isolate band {j} at gamma={params.gamma}, xi={params.xi}",
        )
    return brentq(endpoint_value, lo, hi, args=(params, length), xtol=1e-13, rtol=1e-14)
