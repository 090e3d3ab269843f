"""Energy matrices M^(l), S^(l) of natural cubic splines and the six parametrization families.

For a natural spline with knot values s = (s(0), ..., s(l)):

    ∫_0^l s(t)^2 dt = sᵀ M s = sᵀ S s,    S = (M + Mᵀ)/2.

M is pinned by one assembly convention: the square of each interval polynomial
p + qτ + uτ²/2 + vτ³/6 is expanded over the blocks (p, q, u, v), and every
cross term a·b with a before b in that order is written as aᵀ(2c_ab)b, i.e. with
`a` on the row side. Squares a·a contribute aᵀ(c_aa)a.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from errors import ConditioningWarning, DimensionError, SingularityError
from models import EnergyMatrixPair, FamilyId, ParamFamily
from spline_core import second_derivative_map

# Taylor scaling of each block inside the interval polynomial.
_BLOCK_SCALE = np.array([1.0, 1.0, 1.0 / 2.0, 1.0 / 6.0])

PIVOT_RTOL = 1e-13
CONDITION_LIMIT = 1e12


def _moment_coefficients() -> np.ndarray:
    """c_ab = scale_a scale_b ∫_0^1 τ^(a+b) dτ for the blocks (p, q, u, v)."""
    powers = np.arange(4)
    hilbert = 1.0 / (powers[:, None] + powers[None, :] + 1.0)
    return hilbert * np.outer(_BLOCK_SCALE, _BLOCK_SCALE)


def derivative_maps(l: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Q (l+1 x l+1), U (l+1 x l+1), V (l x l+1) with q = Q p, u = U p, v = V p."""
    U = second_derivative_map(l)
    V = U[1:] - U[:-1]
    eye = np.eye(l + 1)
    Q = np.empty((l + 1, l + 1))
    Q[:l] = (eye[1:] - eye[:-1]) - U[:l] / 2.0 - V / 6.0
    Q[l] = Q[l - 1] + U[l - 1] + V[l - 1] / 2.0
    return Q, U, V


@lru_cache(maxsize=None)
def assemble_energy(l: int) -> EnergyMatrixPair:
    """M^(l) under the row-side/block-order convention, and S^(l) = (M + Mᵀ)/2."""
    if l < 1:
        raise DimensionError(f"energy matrices need l >= 1 (got {l})")
    Q, U, V = derivative_maps(l)
    # Row i of each block is the linear map of that coefficient on interval i.
    blocks = (np.eye(l + 1)[:l], Q[:l], U[:l], V)
    coeff = _moment_coefficients()

    M = np.zeros((l + 1, l + 1))
    for a in range(4):
        for b in range(a, 4):
            weight = coeff[a, b] if a == b else 2.0 * coeff[a, b]
            M += weight * (blocks[a].T @ blocks[b])
    S = (M + M.T) / 2.0

    M.setflags(write=False)
    S.setflags(write=False)
    return EnergyMatrixPair(level=l, M=M, S=S)


def _lu_inverse(matrix: np.ndarray, level: Optional[int]) -> Tuple[np.ndarray, float]:
    """Inverse through LU with partial pivoting, and the pivot ratio max|u_ii| / min|u_ii|."""
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DimensionError("matrix entries must be finite")

    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale == 0.0:
        raise SingularityError("zero matrix", level=level)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A)
    pivots = np.abs(np.diag(lu))
    smallest = float(pivots.min())
    if smallest < PIVOT_RTOL * scale:
        raise SingularityError(
            f"pivot {smallest:.3e} below {PIVOT_RTOL:g} x max-norm {scale:.3e}", level=level
        )
    return lu_solve((lu, piv), np.eye(A.shape[0])), float(pivots.max()) / smallest


def _warn_conditioning(ratio: float, level: Optional[int]) -> None:
    if ratio > CONDITION_LIMIT:
        where = f"level l={level}" if level is not None else "matrix"
        warnings.warn(
            f"{where}: LU pivot ratio {ratio:.3e} suggests condition number above {CONDITION_LIMIT:g}",
            ConditioningWarning,
            stacklevel=3,
        )


def invert(matrix: np.ndarray, level: Optional[int] = None) -> np.ndarray:
    """Inverse through LU with partial pivoting.

    Raises SingularityError when a pivot falls below 1e-13 times the max-norm of
    the matrix; warns (ConditioningWarning) when the pivot ratio exceeds 1e12.
    """
    inverse, ratio = _lu_inverse(matrix, level)
    _warn_conditioning(ratio, level)
    return inverse


@lru_cache(maxsize=None)
def _inverses(l: int) -> Tuple[np.ndarray, np.ndarray, float, float]:
    pair = assemble_energy(l)
    M_inv, M_ratio = _lu_inverse(pair.M, l)
    S_inv, S_ratio = _lu_inverse(pair.S, l)
    M_inv.setflags(write=False)
    S_inv.setflags(write=False)
    return M_inv, S_inv, M_ratio, S_ratio


def family_level(family_id: FamilyId, l: int) -> Tuple[np.ndarray, np.ndarray]:
    """(Θ^(l), B^(l)) of one family; B^(l) is the cached inverse of Θ^(l).

    The conditioning warning of the underlying inversion is repeated on every call.
    """
    pair = assemble_energy(l)
    M_inv, S_inv, M_ratio, S_ratio = _inverses(l)
    if family_id in (FamilyId.S, FamilyId.S_INV):
        _warn_conditioning(S_ratio, l)
    else:
        _warn_conditioning(M_ratio, l)
    if family_id is FamilyId.M:
        return pair.M, M_inv
    if family_id is FamilyId.M_T:
        return pair.M.T, M_inv.T
    if family_id is FamilyId.M_INV:
        return M_inv, pair.M
    if family_id is FamilyId.M_INV_T:
        return M_inv.T, pair.M.T
    if family_id is FamilyId.S:
        return pair.S, S_inv
    if family_id is FamilyId.S_INV:
        return S_inv, pair.S
    raise ValueError(f"unknown family {family_id!r}")


def build_family(family_id: FamilyId, n: int, workers: int = 1) -> ParamFamily:
    """Θ^(1)..Θ^(n) of one family.

    Levels are assembled on `workers` threads and merged in level order.
    """
    family_id = FamilyId(family_id)
    if n < 1:
        raise DimensionError(f"a family needs n >= 1 (got {n})")
    levels = range(1, n + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(lambda l: family_level(family_id, l), levels))
    else:
        pairs = [family_level(family_id, l) for l in levels]
    return ParamFamily(
        id=family_id,
        matrices=tuple(theta for theta, _ in pairs),
        bases=tuple(basis for _, basis in pairs),
    )
