"""Selection criteria: each maps an analyzed Θ^(l) (and possibly s(0..l)) to one conservative row.

Argmax/argmin sets (tail1, tail2, maxcor, nearU) treat scores within
TIE_RTOL·(1+|extremum|) of the extremum as tied and average the tied rows.
The variance and distance orderings (var, fd) are stable sorts by (score, j):
the first element wins, nothing is averaged.

The score helpers below work on every row of I(l) at once and are shared with
the tournament's vectorized scans.
"""

import math
from typing import Sequence

import numpy as np

from errors import DimensionError
from models import CriterionId, CriterionKind, ParamMatrix, RowSource, WeightedStats, WeightRow

TIE_RTOL = 1e-9


# --- Statistics --- #

def weighted_stats(w: WeightRow, s: Sequence[float]) -> WeightedStats:
    """m₁ = Σ w_i s_i and var = Σ w_i (s_i − m₁)²; var may be negative."""
    s = np.asarray(s, dtype=float)
    mean = w.apply(s)
    variance = float(w.weights @ (s - mean) ** 2)
    return WeightedStats(mean=mean, variance=variance)


def weighted_square_error(w: WeightRow, s: Sequence[float], a: float) -> float:
    """Σ w_i (s_i − a)²; for a conservative row it equals var + (m₁ − a)²."""
    s = np.asarray(s, dtype=float)
    if s.shape != w.weights.shape:
        raise DimensionError(f"weights have {w.weights.size} entries, data has {s.size}")
    return float(w.weights @ (s - a) ** 2)


# --- Shared score helpers --- #

def extremal_mask(scores: np.ndarray, maximize: bool) -> np.ndarray:
    """Boolean mask of the argmax (or argmin) set along axis 0, with tie tolerance."""
    extremum = scores.max(axis=0) if maximize else scores.min(axis=0)
    return np.abs(scores - extremum) <= TIE_RTOL * (1.0 + np.abs(extremum))


def tail_sums(pm: ParamMatrix) -> np.ndarray:
    """Column k holds Σ_{i=k}^{l} of each normalized row, shape (card, l+1)."""
    rows = pm.normalized_rows
    return np.cumsum(rows[:, ::-1], axis=1)[:, ::-1]


def tail_maxima(pm: ParamMatrix) -> np.ndarray:
    """Column k holds max_{k<=i<=l} of each normalized row, shape (card, l+1)."""
    rows = pm.normalized_rows
    return np.maximum.accumulate(rows[:, ::-1], axis=1)[:, ::-1]


def maxcor_scores(pm: ParamMatrix) -> np.ndarray:
    """|θ_j·1| / (√(l+1) ‖θ_j‖) for j in I(l)."""
    idx = np.array(pm.index_set)
    return np.abs(pm.trend_products[idx]) / (math.sqrt(pm.level + 1.0) * pm.row_norms[idx])


def near_uniform_distances(pm: ParamMatrix, q1: float) -> np.ndarray:
    """‖θ_j/(θ_j·1) − uniform‖_q1 for j in I(l)."""
    if q1 not in (1.0, 2.0, math.inf):
        raise ValueError(f"q1 must be one of 1, 2, inf (got {q1!r})")
    uniform = 1.0 / (pm.level + 1.0)
    return np.linalg.norm(pm.normalized_rows - uniform, ord=q1, axis=1)


def _prefix(pm: ParamMatrix, s: Sequence[float]) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape != (pm.level + 1,):
        raise DimensionError(f"level {pm.level} expects s(0..{pm.level}), got {s.size} values")
    return s


def row_means(pm: ParamMatrix, s: Sequence[float]) -> np.ndarray:
    """Weighted mean of s(0..l) under every normalized row of I(l)."""
    return pm.normalized_rows @ _prefix(pm, s)


def variance_order(pm: ParamMatrix, s: Sequence[float]) -> np.ndarray:
    """Positions in I(l) sorted by var(l, j) ascending, ties by smallest j."""
    s = _prefix(pm, s)
    means = pm.normalized_rows @ s
    variances = np.sum(pm.normalized_rows * (s[None, :] - means[:, None]) ** 2, axis=1)
    return np.argsort(variances, kind="stable")


def distance_orders(pm: ParamMatrix, s: Sequence[float]) -> np.ndarray:
    """Row k: positions in I(l) sorted by |m₁(row) − s(k)| ascending, for every anchor k = 0..l."""
    s = _prefix(pm, s)
    means = pm.normalized_rows @ s
    distances = np.abs(means[None, :] - s[:, None])
    return np.argsort(distances, axis=1, kind="stable")


# --- Row construction --- #

def _average_rows(pm: ParamMatrix, positions: np.ndarray, criterion: CriterionId) -> WeightRow:
    positions = np.asarray(positions, dtype=int)
    weights = pm.normalized_rows[positions].mean(axis=0)
    rows = tuple(pm.index_set[k] for k in positions)
    return WeightRow(
        level=pm.level,
        weights=weights,
        source=RowSource(family=pm.family, rows=rows, criterion=criterion.label),
    )


def _clamp(index: int, card: int) -> int:
    return min(index, card - 1)


# --- Criteria --- #

def s_u(pm: ParamMatrix, u: int) -> WeightRow:
    """Row j(min(u, card−1)) of the ascending index set."""
    position = _clamp(u, pm.card)
    return _average_rows(pm, np.array([position]), CriterionId(CriterionKind.U, u=u))


def s_mean(pm: ParamMatrix) -> WeightRow:
    return _average_rows(pm, np.arange(pm.card), CriterionId(CriterionKind.MEAN))


def s_tail1(pm: ParamMatrix, u: int) -> WeightRow:
    start = min(u, pm.level)
    mask = extremal_mask(tail_sums(pm)[:, start], maximize=True)
    return _average_rows(pm, np.flatnonzero(mask), CriterionId(CriterionKind.TAIL1, u=u))


def s_tail2(pm: ParamMatrix, u: int) -> WeightRow:
    start = min(u, pm.level)
    mask = extremal_mask(tail_maxima(pm)[:, start], maximize=True)
    return _average_rows(pm, np.flatnonzero(mask), CriterionId(CriterionKind.TAIL2, u=u))


def s_maxcor(pm: ParamMatrix) -> WeightRow:
    mask = extremal_mask(maxcor_scores(pm), maximize=True)
    return _average_rows(pm, np.flatnonzero(mask), CriterionId(CriterionKind.MAXCOR))


def s_near_uniform(pm: ParamMatrix, q1: float) -> WeightRow:
    criterion = CriterionId(CriterionKind.NEAR_U, q1=q1)
    mask = extremal_mask(near_uniform_distances(pm, criterion.q1), maximize=False)
    return _average_rows(pm, np.flatnonzero(mask), criterion)


def s_var(pm: ParamMatrix, s: Sequence[float], u: int) -> WeightRow:
    """Position min(u, card−1) of I(l) ordered by variance."""
    order = variance_order(pm, s)
    position = order[_clamp(u, pm.card)]
    return _average_rows(pm, np.array([position]), CriterionId(CriterionKind.VAR, u=u))


def s_fd(pm: ParamMatrix, s: Sequence[float], u: int, v: int) -> WeightRow:
    """Position min(v, card−1) of I(l) ordered by distance of the weighted mean to s(min(l, u))."""
    anchor = min(pm.level, u)
    order = distance_orders(pm, s)[anchor]
    position = order[_clamp(v, pm.card)]
    return _average_rows(pm, np.array([position]), CriterionId(CriterionKind.FD, u=u, v=v))


def apply_criterion(pm: ParamMatrix, criterion: CriterionId, s: Sequence[float]) -> WeightRow:
    """Weight row of `criterion` at the level of `pm`; `s` is the data prefix s(0..l)."""
    kind = criterion.kind
    if kind is CriterionKind.U:
        return s_u(pm, criterion.u)
    if kind is CriterionKind.MEAN:
        return s_mean(pm)
    if kind is CriterionKind.TAIL1:
        return s_tail1(pm, criterion.u)
    if kind is CriterionKind.TAIL2:
        return s_tail2(pm, criterion.u)
    if kind is CriterionKind.MAXCOR:
        return s_maxcor(pm)
    if kind is CriterionKind.NEAR_U:
        return s_near_uniform(pm, criterion.q1)
    if kind is CriterionKind.VAR:
        return s_var(pm, s, criterion.u)
    if kind is CriterionKind.FD:
        return s_fd(pm, s, criterion.u, criterion.v)
    raise ValueError(f"unknown criterion kind {kind!r}")
