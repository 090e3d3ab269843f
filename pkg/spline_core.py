"""Natural cubic splines on the integer knots 0..l.

Splines are stored in knot form: on [i, i+1)

    s(t) = p_i + q_i (t-i) + u_i (t-i)^2 / 2 + v_i (t-i)^3 / 6

with the C^2 constraints

    p_i + q_i + u_i/2 + v_i/6 = p_{i+1}     (c0)
    q_i + u_i + v_i/2 = q_{i+1}             (c1)
    v_i = u_{i+1} - u_i                     (c2)

and the natural boundary u_0 = u_l = 0.
"""

from typing import Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import solve_banded

from errors import DimensionError, DomainError, NumericalError
from models import PiecewiseCubic

# 4-point Gauss-Legendre rule mapped from [-1, 1] to [0, 1]; exact up to degree 7.
_GAUSS_NODES, _GAUSS_WEIGHTS = leggauss(4)
GAUSS_TAU = (_GAUSS_NODES + 1.0) / 2.0
GAUSS_WEIGHTS = _GAUSS_WEIGHTS / 2.0


def _solve_interior(rhs: np.ndarray) -> np.ndarray:
    """Solve u_{i-1} + 4 u_i + u_{i+1} = rhs_i for the interior knots.

    `rhs` has one row per interior knot and may carry several right-hand sides
    as columns. The matrix is strictly diagonally dominant.
    """
    m = rhs.shape[0]
    ab = np.zeros((3, m))
    ab[0, 1:] = 1.0
    ab[1, :] = 4.0
    ab[2, :-1] = 1.0
    return solve_banded((1, 1), ab, rhs)


def second_difference_matrix(l: int) -> np.ndarray:
    """(l-1) x (l+1) matrix D with (D p)_i = 6 (p_{i-1} - 2 p_i + p_{i+1})."""
    D = np.zeros((l - 1, l + 1))
    for row in range(l - 1):
        D[row, row:row + 3] = (6.0, -12.0, 6.0)
    return D


def second_derivative_map(l: int) -> np.ndarray:
    """Matrix U with u = U p for the natural spline through p_0..p_l."""
    if l < 1:
        raise DimensionError(f"spline level must be >= 1 (got {l})")
    U = np.zeros((l + 1, l + 1))
    if l >= 2:
        U[1:l] = _solve_interior(second_difference_matrix(l))
    return U


def interpolate_natural(values: Sequence[float]) -> PiecewiseCubic:
    """Natural cubic spline through (i, values[i]), i = 0..l."""
    p = np.asarray(values, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DimensionError(f"need at least 2 knot values (got {p.size})")
    if not np.all(np.isfinite(p)):
        raise NumericalError("knot values must be finite")
    l = p.size - 1

    u = np.zeros(l + 1)
    if l >= 2:
        u[1:l] = _solve_interior(6.0 * (p[:-2] - 2.0 * p[1:-1] + p[2:]))
    v = np.diff(u)
    q = np.empty(l + 1)
    q[:l] = np.diff(p) - u[:l] / 2.0 - v / 6.0
    q[l] = q[l - 1] + u[l - 1] + v[l - 1] / 2.0
    return PiecewiseCubic(p=p, q=q, u=u, v=v)


def _interval_index(spline: PiecewiseCubic, t: np.ndarray) -> np.ndarray:
    # t = l belongs to the last interval [l-1, l].
    return np.minimum(np.floor(t).astype(int), spline.level - 1)


def _evaluate_pieces(spline: PiecewiseCubic, i: np.ndarray, dt: np.ndarray) -> np.ndarray:
    return (
        spline.p[i]
        + spline.q[i] * dt
        + spline.u[i] * dt ** 2 / 2.0
        + spline.v[i] * dt ** 3 / 6.0
    )


def evaluate_many(spline: PiecewiseCubic, ts: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    t = np.asarray(ts, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0) or np.any(t > spline.level):
        raise DomainError(f"evaluation points must lie in [0, {spline.level}]")
    i = _interval_index(spline, t)
    return _evaluate_pieces(spline, i, t - i)


def evaluate(spline: PiecewiseCubic, t: float) -> float:
    """s(t) for t in [0, l]."""
    return float(evaluate_many(spline, np.array([t]))[0])


def integral_of_square(spline: PiecewiseCubic) -> float:
    """∫_0^l s(t)^2 dt, exact: the integrand has degree 6 on each unit interval."""
    l = spline.level
    i = np.repeat(np.arange(l), GAUSS_TAU.size)
    tau = np.tile(GAUSS_TAU, l)
    w = np.tile(GAUSS_WEIGHTS, l)
    values = _evaluate_pieces(spline, i, tau)
    return float(np.sum(w * values ** 2))


def derivative_residuals(spline: PiecewiseCubic) -> float:
    """Largest absolute residual of (c0)-(c2) and of the natural boundary."""
    p, q, u, v = spline.p, spline.q, spline.u, spline.v
    c0 = p[:-1] + q[:-1] + u[:-1] / 2.0 + v / 6.0 - p[1:]
    c1 = q[:-1] + u[:-1] + v / 2.0 - q[1:]
    c2 = v - np.diff(u)
    boundary = np.array([u[0], u[-1]])
    return float(np.max(np.abs(np.concatenate([c0, c1, c2, boundary]))))


def sample(spline: PiecewiseCubic, resolution: int = 10) -> np.ndarray:
    """(t, s(t)) pairs on a grid with `resolution` points per unit interval, knots included."""
    if resolution < 1:
        raise DomainError("resolution must be >= 1")
    t = np.linspace(0.0, spline.level, spline.level * resolution + 1)
    return np.column_stack([t, evaluate_many(spline, t)])
