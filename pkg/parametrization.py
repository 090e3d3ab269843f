"""Coordinates, basis and trend-correlated rows of an invertible Θ^(l).

    s = Σ_j (θ_j · s) b_j        (B = Θ⁻¹, b_j its columns)

Rows with θ_j · 1 ≠ 0 form the index set I(l); normalizing them by θ_j · 1
gives the conservative rows the criteria choose from.
"""

import warnings
from typing import Optional, Tuple

import numpy as np

from energy_matrices import invert
from errors import DimensionError, NotCorrelatedError, SingularityError, ThresholdWarning
from models import ParamFamily, ParamMatrix, RowSource, WeightRow

DEFAULT_TOL_REL = 1e-10
NEAR_THRESHOLD_FACTOR = 10.0


def analyze(
    theta: np.ndarray,
    tol_rel: float = DEFAULT_TOL_REL,
    *,
    level: Optional[int] = None,
    basis: Optional[np.ndarray] = None,
    family: Optional[str] = None,
) -> ParamMatrix:
    """Analyze Θ^(l): basis, trend products and I(l).

    j is in I(l) when |θ_j·1| > tol_rel·√(l+1)·‖θ_j‖₂. `basis` may pass a
    precomputed inverse; otherwise it is computed here.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 2 or theta.shape[0] != theta.shape[1] or theta.shape[0] < 2:
        raise DimensionError(f"expected a square matrix of size >= 2, got shape {theta.shape}")
    if tol_rel <= 0:
        raise ValueError("tol_rel must be positive")
    l = theta.shape[0] - 1
    if level is None:
        level = l
    if basis is None:
        basis = invert(theta, level=level)
    else:
        basis = np.asarray(basis, dtype=float)
        if basis.shape != theta.shape:
            raise DimensionError("basis and theta differ in shape")

    trend = theta.sum(axis=1)
    norms = np.linalg.norm(theta, axis=1)
    threshold = tol_rel * np.sqrt(l + 1.0) * norms
    magnitude = np.abs(trend)
    index_set = tuple(int(j) for j in np.flatnonzero(magnitude > threshold))
    if not index_set:
        # Θ invertible implies Θ·1 ≠ 0, so this only happens for a singular input.
        raise SingularityError("no row is correlated with the constant trend", level=level)

    near = (magnitude > threshold / NEAR_THRESHOLD_FACTOR) & (magnitude <= threshold * NEAR_THRESHOLD_FACTOR)
    near_rows = tuple(int(j) for j in np.flatnonzero(near))
    if near_rows:
        warnings.warn(
            f"level l={level}: trend products of rows {list(near_rows)} lie within "
            f"{NEAR_THRESHOLD_FACTOR:g}x of the I(l) threshold",
            ThresholdWarning,
            stacklevel=2,
        )

    idx = np.array(index_set)
    normalized = theta[idx] / trend[idx, None]
    for arr in (trend, norms, threshold, normalized):
        arr.setflags(write=False)
    return ParamMatrix(
        level=level,
        theta=theta,
        basis=basis,
        trend_products=trend,
        index_set=index_set,
        normalized_rows=normalized,
        row_norms=norms,
        threshold=threshold,
        near_threshold=near_rows,
        family=family,
    )


def analyze_family(family: ParamFamily, tol_rel: float = DEFAULT_TOL_REL) -> Tuple[ParamMatrix, ...]:
    """ParamMatrix for every level 1..n; entry l-1 holds level l."""
    return tuple(
        analyze(family.matrix(l), tol_rel, level=l, basis=family.basis(l), family=family.id.value)
        for l in range(1, family.n + 1)
    )


def conservative_row(pm: ParamMatrix, j: int, criterion: str = "row") -> WeightRow:
    """θ_j / (θ_j·1) for j in I(l)."""
    if j not in pm.index_set:
        raise NotCorrelatedError(level=pm.level, row=j)
    return WeightRow(
        level=pm.level,
        weights=pm.normalized_rows[pm.position(j)],
        source=RowSource(family=pm.family, rows=(j,), criterion=criterion),
    )


def trend_reproduction_error(pm: ParamMatrix) -> float:
    """max_i |Σ_{j∈I} (θ_j·1) b_ij − 1|."""
    idx = np.array(pm.index_set)
    ones = pm.basis[:, idx] @ pm.trend_products[idx]
    return float(np.max(np.abs(ones - 1.0)))


def _checked_vector(pm: ParamMatrix, s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape != (pm.level + 1,):
        raise DimensionError(f"level {pm.level} expects {pm.level + 1} values, got shape {s.shape}")
    return s


def coordinates(pm: ParamMatrix, s: np.ndarray) -> np.ndarray:
    """(θ_0·s, ..., θ_l·s), the coordinates of s in the basis B^(l)."""
    return pm.theta @ _checked_vector(pm, s)


def reconstruct(pm: ParamMatrix, s: np.ndarray) -> np.ndarray:
    """Σ_j (θ_j·s) b_j."""
    return pm.basis @ coordinates(pm, s)


def decompose(pm: ParamMatrix, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Bulk (rows in I(l)) and residual (rows outside I(l)) components of s."""
    coords = coordinates(pm, s)
    inside = np.zeros(pm.level + 1, dtype=bool)
    inside[list(pm.index_set)] = True
    bulk = pm.basis[:, inside] @ coords[inside]
    residual = pm.basis[:, ~inside] @ coords[~inside]
    return bulk, residual
