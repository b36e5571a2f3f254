"""
Boundary curves, tubular coordinates and gauge normalization.

Conventions: curves run counterclockwise, s is arc length from the first
node, nu is the outward unit normal, curvature is positive on a
counterclockwise circle, and the collar map is

    Phi(s, t) = M(s) - t nu(s),   0 <= t < t0,

so that d_s Phi = (1 - t k) T and the area element is (1 - t k) ds dt.
"""
import io
import math
from pathlib import Path
from typing import Callable

import numpy as np
import structlog
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from robin_scope.implementations.datastructures import (
    BoundaryCurve,
    GaugeField,
    TubularCoords,
)
from robin_scope.implementations.errors import GeometryErrors, SpectralException

logger = structlog.get_logger(__name__)

DEFAULT_NODES = 512
MIN_SAMPLES = 8
# oversampling of the boundary used for nearest-point queries
DENSE_FACTOR = 4
MAX_COLLAR_HALVINGS = 8

VectorPotential = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------

def _signed_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _periodic_spline(s_closed: np.ndarray, values: np.ndarray) -> CubicSpline:
    return CubicSpline(s_closed, np.append(values, values[0]), bc_type="periodic")


def _curve_from_uniform(nodes: np.ndarray, total_length: float) -> BoundaryCurve:
    """Build a smooth curve from nodes already uniform in arc length."""
    n = nodes.shape[0]
    ds = total_length / n
    s_closed = np.arange(n + 1) * ds
    x, y = nodes[:, 0], nodes[:, 1]
    xp = (np.roll(x, -1) - np.roll(x, 1)) / (2.0 * ds)
    yp = (np.roll(y, -1) - np.roll(y, 1)) / (2.0 * ds)
    xpp = (np.roll(x, -1) - 2.0 * x + np.roll(x, 1)) / ds ** 2
    ypp = (np.roll(y, -1) - 2.0 * y + np.roll(y, 1)) / ds ** 2
    kappa = (xp * ypp - yp * xpp) / (xp ** 2 + yp ** 2) ** 1.5

    turning = float(np.sum(kappa) * ds)
    if abs(turning - 2.0 * math.pi) > 0.1:
        raise SpectralException(
            GeometryErrors.DEGENERATE_CURVE,
            f"total curvature {turning:.4f} is not 2 pi; the curve is not simple",
        )
    return BoundaryCurve(
        samples=nodes,
        total_length=float(total_length),
        curvature_samples=kappa,
        counterclockwise=True,
        x_spline=_periodic_spline(s_closed, x),
        y_spline=_periodic_spline(s_closed, y),
    )


def from_points(points: np.ndarray, nodes: int = DEFAULT_NODES) -> BoundaryCurve:
    """
    Resample a closed polyline to ``nodes`` points uniform in arc length.

    The polyline is interpolated by a periodic cubic spline in chord length,
    its arc length is integrated densely and inverted.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise SpectralException(GeometryErrors.DEGENERATE_CURVE, "points must have shape (n, 2)")
    if pts.shape[0] > 1 and np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    if pts.shape[0] < MIN_SAMPLES:
        raise SpectralException(
            GeometryErrors.DEGENERATE_CURVE,
            f"need at least {MIN_SAMPLES} distinct samples, got {pts.shape[0]}",
        )
    seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
    if np.any(seg <= 1e-12 * seg.max()):
        raise SpectralException(GeometryErrors.DEGENERATE_CURVE, "consecutive samples coincide")
    if _signed_area(pts) < 0:
        pts = pts[::-1]
        seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)

    u = np.concatenate([[0.0], np.cumsum(seg)])
    sx = _periodic_spline(u, pts[:, 0])
    sy = _periodic_spline(u, pts[:, 1])
    dense = np.linspace(0.0, u[-1], 64 * pts.shape[0] + 1)
    speed = np.hypot(sx(dense, 1), sy(dense, 1))
    arc = cumulative_trapezoid(speed, dense, initial=0.0)
    total = float(arc[-1])
    u_nodes = np.interp(np.arange(nodes) * total / nodes, arc, dense)
    curve = _curve_from_uniform(np.column_stack([sx(u_nodes), sy(u_nodes)]), total)
    logger.info("geometry.curve.resampled", inputs=int(pts.shape[0]), nodes=nodes, length=total)
    return curve


def circle(radius: float = 1.0, nodes: int = DEFAULT_NODES) -> BoundaryCurve:
    """Circle of the given radius, s = 0 at (radius, 0)."""
    if radius <= 0:
        raise SpectralException(GeometryErrors.DEGENERATE_CURVE, "radius must be positive")
    theta = 2.0 * math.pi * np.arange(nodes) / nodes
    pts = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    return _curve_from_uniform(pts, 2.0 * math.pi * radius)


def ellipse(a: float, b: float, nodes: int = DEFAULT_NODES) -> BoundaryCurve:
    if a <= 0 or b <= 0:
        raise SpectralException(GeometryErrors.DEGENERATE_CURVE, "semi-axes must be positive")
    theta = 2.0 * math.pi * np.arange(8 * nodes) / (8 * nodes)
    return from_points(np.column_stack([a * np.cos(theta), b * np.sin(theta)]), nodes)


def square(side: float, nodes: int = DEFAULT_NODES) -> BoundaryCurve:
    """
    Boundary of [0, side]^2 from the origin, counterclockwise.

    The turning at each corner is lumped on the corner node, so the curve
    has no collar and no splines.
    """
    if side <= 0:
        raise SpectralException(GeometryErrors.DEGENERATE_CURVE, "side must be positive")
    per_side = max(nodes // 4, 2)
    f = np.arange(per_side) / per_side * side
    z, full = np.zeros(per_side), np.full(per_side, side)
    pts = np.vstack([
        np.column_stack([f, z]),
        np.column_stack([full, f]),
        np.column_stack([side - f, full]),
        np.column_stack([z, side - f]),
    ])
    ds = side / per_side
    kappa = np.zeros(pts.shape[0])
    kappa[::per_side] = 0.5 * math.pi / ds
    return BoundaryCurve(
        samples=pts,
        total_length=4.0 * side,
        curvature_samples=kappa,
        counterclockwise=True,
    )


def load_curve(path: str | Path, nodes: int = DEFAULT_NODES) -> BoundaryCurve:
    """Read rows of ``x, y`` (comma or whitespace separated, ``#`` comments)."""
    text = Path(path).read_text()
    try:
        pts = np.loadtxt(io.StringIO(text.replace(",", " ")), ndmin=2)
    except ValueError as exc:
        raise SpectralException(GeometryErrors.INVALID_CURVE_FILE, f"{path}: {exc}") from exc
    if pts.shape[1] != 2:
        raise SpectralException(GeometryErrors.INVALID_CURVE_FILE, f"{path}: expected 2 columns, got {pts.shape[1]}")
    return from_points(pts, nodes)


# ---------------------------------------------------------------------------
# evaluation along the curve
# ---------------------------------------------------------------------------

def _wrap(curve: BoundaryCurve, s) -> np.ndarray:
    return np.mod(np.asarray(s, dtype=float), curve.total_length)


def position(curve: BoundaryCurve, s) -> np.ndarray:
    s = _wrap(curve, s)
    if curve.smooth:
        return np.stack([curve.x_spline(s), curve.y_spline(s)], axis=-1)
    grid = np.arange(curve.n_nodes + 1) * curve.spacing
    closed = curve.closed_samples
    return np.stack([np.interp(s, grid, closed[:, 0]), np.interp(s, grid, closed[:, 1])], axis=-1)


def unit_tangent(curve: BoundaryCurve, s) -> np.ndarray:
    s = _wrap(curve, s)
    if curve.smooth:
        d = np.stack([curve.x_spline(s, 1), curve.y_spline(s, 1)], axis=-1)
    else:
        closed = curve.closed_samples
        k = np.minimum((s / curve.spacing).astype(int), curve.n_nodes - 1)
        d = closed[k + 1] - closed[k]
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


def outward_normal(curve: BoundaryCurve, s) -> np.ndarray:
    T = unit_tangent(curve, s)
    return np.stack([T[..., 1], -T[..., 0]], axis=-1)


def curvature(curve: BoundaryCurve, s):
    """Signed curvature k(s), interpolated periodically from the node values."""
    s = _wrap(curve, s)
    grid = np.arange(curve.n_nodes + 1) * curve.spacing
    k = np.interp(s, grid, np.append(curve.curvature_samples, curve.curvature_samples[0]))
    return float(k) if np.ndim(k) == 0 else k


def curvature_spline(curve: BoundaryCurve, s):
    """Curvature from the spline derivatives; cross-check of ``curvature``."""
    if not curve.smooth:
        raise SpectralException(GeometryErrors.DEGENERATE_CURVE, "curve has corners")
    s = _wrap(curve, s)
    xp, yp = curve.x_spline(s, 1), curve.y_spline(s, 1)
    xpp, ypp = curve.x_spline(s, 2), curve.y_spline(s, 2)
    k = (xp * ypp - yp * xpp) / (xp ** 2 + yp ** 2) ** 1.5
    return float(k) if np.ndim(k) == 0 else k


def total_curvature(curve: BoundaryCurve) -> float:
    return float(np.sum(curve.curvature_samples) * curve.spacing)


# ---------------------------------------------------------------------------
# tubular coordinates
# ---------------------------------------------------------------------------

def _dense(curve: BoundaryCurve) -> tuple[np.ndarray, np.ndarray, cKDTree]:
    s = np.arange(DENSE_FACTOR * curve.n_nodes) * curve.spacing / DENSE_FACTOR
    pts = position(curve, s)
    return s, pts, cKDTree(pts)


def _periodic_gap(curve: BoundaryCurve, a, b):
    d = np.abs(np.asarray(a) - np.asarray(b)) % curve.total_length
    return np.minimum(d, curve.total_length - d)


def _nearest_point_audit(curve: BoundaryCurve, t0: float) -> bool:
    """Every collar point Phi(s_i, t) must have its nearest boundary point at s_i."""
    s_dense, _, tree = _dense(curve)
    ds_dense = curve.spacing / DENSE_FACTOR
    s = curve.arc_lengths
    base, nu = position(curve, s), outward_normal(curve, s)
    for frac in (0.25, 0.5, 0.75, 0.95):
        t = frac * t0
        dist, idx = tree.query(base - t * nu)
        if np.any(_periodic_gap(curve, s_dense[idx], s) > 2.0 * ds_dense):
            return False
        if np.any(np.abs(dist - t) > 1e-3 * t0 + ds_dense ** 2 / t):
            return False
    return True


def build_collar(curve: BoundaryCurve, t0: float | None = None) -> TubularCoords:
    """
    Tubular collar of width t0 inside the curve.

    Without ``t0`` the width starts at 0.5 / max|k| and is halved until the
    nearest-point audit passes.
    """
    if not curve.smooth:
        raise SpectralException(GeometryErrors.COLLAR_TOO_DEEP, "a curve with corners has no collar")
    kmax = float(np.max(np.abs(curve.curvature_samples)))
    if t0 is not None:
        if t0 <= 0.0 or t0 * kmax >= 1.0:
            raise SpectralException(
                GeometryErrors.COLLAR_TOO_DEEP,
                f"t0={t0} makes the Jacobian 1 - t k non-positive (max|k|={kmax:.6g})",
            )
        return TubularCoords(curve=curve, t0=float(t0), max_curvature=kmax)

    if kmax > 0:
        width = 0.5 / kmax
    else:
        width = 0.25 * float(np.max(np.ptp(curve.samples, axis=0)))
    for _ in range(MAX_COLLAR_HALVINGS):
        if _nearest_point_audit(curve, width):
            logger.info("geometry.collar", t0=width, max_curvature=kmax)
            return TubularCoords(curve=curve, t0=width, max_curvature=kmax)
        width *= 0.5
    raise SpectralException(GeometryErrors.COLLAR_TOO_DEEP, "no collar width passed the nearest-point audit")


def jacobian(tc: TubularCoords, s, t):
    return 1.0 - np.asarray(t) * curvature(tc.curve, s)


def from_boundary_coords(tc: TubularCoords, s, t) -> np.ndarray:
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr >= tc.t0):
        raise SpectralException(GeometryErrors.OUTSIDE_COLLAR, f"t must lie in [0, {tc.t0})")
    return position(tc.curve, s) - t_arr[..., None] * outward_normal(tc.curve, s)


def to_boundary_coords(tc: TubularCoords, x) -> tuple[float, float]:
    """(s, t) of a point in the collar; the foot point is polished by Brent's method."""
    x = np.asarray(x, dtype=float)
    curve = tc.curve
    s_dense, _, tree = _dense(curve)
    _, idx = tree.query(x)
    s_guess = float(s_dense[idx])

    def foot(s: float) -> float:
        return float(np.dot(x - position(curve, s), unit_tangent(curve, s)))

    half = 2.0 * curve.spacing / DENSE_FACTOR
    lo, hi = s_guess - half, s_guess + half
    while foot(lo) * foot(hi) > 0.0:
        half *= 2.0
        if half > 0.5 * curve.total_length:
            raise SpectralException(GeometryErrors.OUTSIDE_COLLAR, f"no foot point for {x.tolist()}")
        lo, hi = s_guess - half, s_guess + half
    s_star = brentq(foot, lo, hi, xtol=1e-14)
    t = -float(np.dot(x - position(curve, s_star), outward_normal(curve, s_star)))
    if t < -1e-12 or t >= tc.t0:
        raise SpectralException(
            GeometryErrors.OUTSIDE_COLLAR,
            f"point {x.tolist()} has t={t:.6g}, outside [0, {tc.t0})",
        )
    return float(np.mod(s_star, curve.total_length)), max(t, 0.0)


# ---------------------------------------------------------------------------
# potentials in boundary coordinates
# ---------------------------------------------------------------------------

def pullback_potential(tc: TubularCoords, A_xy: VectorPotential, s, t) -> tuple[np.ndarray, np.ndarray]:
    """Components (A~_1, A~_2) = ((1 - t k) A.T, -A.nu) at Phi(s, t)."""
    s_arr, t_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    X = from_boundary_coords(tc, s_arr, t_arr)
    a1, a2 = A_xy(X[..., 0], X[..., 1])
    A = np.stack(np.broadcast_arrays(a1, a2), axis=-1)
    T = unit_tangent(tc.curve, s_arr)
    nu = outward_normal(tc.curve, s_arr)
    along = np.sum(A * T, axis=-1)
    return jacobian(tc, s_arr, t_arr) * along, -np.sum(A * nu, axis=-1)


def curl_xy(A_xy: VectorPotential, x, y, step: float = 1e-6):
    """B = d_x A_2 - d_y A_1 by centred differences."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dA2 = A_xy(x + step, y)[1] - A_xy(x - step, y)[1]
    dA1 = A_xy(x, y + step)[0] - A_xy(x, y - step)[0]
    return (dA2 - dA1) / (2.0 * step)


def collar_field(tc: TubularCoords, A_xy: VectorPotential, s, t):
    X = from_boundary_coords(tc, s, t)
    return curl_xy(A_xy, X[..., 0], X[..., 1])


def gauge_normalize(
    tc: TubularCoords,
    A_xy: VectorPotential,
    S0: float,
    window: tuple[float, float, float],
    *,
    n_s: int = 129,
    n_t: int = 65,
) -> GaugeField:
    """
    Gauge the potential on the window [S1, S2] x [0, T] so that A_2 = 0,
    A_1 = 0 on t = 0 and the phase vanishes at (S0, 0).
    """
    S1, S2, T = window
    if T >= tc.t0:
        raise SpectralException(GeometryErrors.WINDOW_TOO_DEEP, f"window depth {T} >= collar width {tc.t0}")
    if not S1 <= S0 <= S2:
        raise SpectralException(GeometryErrors.OUTSIDE_COLLAR, f"S0={S0} lies outside [{S1}, {S2}]")

    s = np.linspace(S1, S2, n_s)
    t = np.linspace(0.0, T, n_t)
    S, Tm = np.meshgrid(s, t, indexing="ij")
    A1, A2 = pullback_potential(tc, A_xy, S, Tm)

    # remove A_2 with phi_1 = int_0^t A_2
    phi1 = cumulative_trapezoid(A2, t, axis=1, initial=0.0)
    A1p = A1 - np.gradient(phi1, s, axis=0, edge_order=2)
    # remove the boundary trace with phi_2 = int_S0^s A1'(., 0)
    phi2 = cumulative_trapezoid(A1p[:, 0], s, initial=0.0)
    phi2 -= np.interp(S0, s, phi2)
    A1bar = A1p - A1p[:, :1]

    B0 = float(collar_field(tc, A_xy, S0, 0.0))
    beta = A1bar + B0 * Tm
    logger.info("geometry.gauge", S0=S0, B0=B0, window=list(window))
    return GaugeField(
        s_grid=s,
        t_grid=t,
        A1=A1bar,
        A2=np.zeros_like(A1bar),
        phase=phi1 + phi2[:, None],
        B0=B0,
        beta=beta,
        S0=float(S0),
    )


def normalized_curl(gf: GaugeField) -> np.ndarray:
    """-d_t A_1 on the window; equals (1 - t k) B~ up to discretization."""
    return -np.gradient(gf.A1, gf.t_grid, axis=1, edge_order=2)
