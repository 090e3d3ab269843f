"""One-step-ahead backtest: prediction cost and per-family hyperparameter scans.

A criterion at level l predicts s(l+1) by its weight row applied to s(0..l).
Cost over levels L..n-1:

    q = 1, 2 : Σ |s(l+1) − prediction|^q / (n − L)
    q = ∞    : max |s(l+1) − prediction|

Every candidate prediction of a family is computed once into a CandidateTable,
independent of q; the scans then only aggregate errors.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import criteria
from errors import DimensionError, LagError
from models import (
    Q_VALUES,
    CostReport,
    CriterionId,
    CriterionKind,
    FamilyId,
    ParamMatrix,
    PredictorTrace,
    ScoredCandidate,
    SeriesData,
)

U_SCAN_KINDS = (CriterionKind.U, CriterionKind.TAIL1, CriterionKind.TAIL2, CriterionKind.VAR)


def check_lag(lag: int, n: int) -> None:
    if not 1 <= lag < n:
        raise LagError(f"lag L={lag} must satisfy 1 <= L < n={n}")


def aggregate_errors(errors: np.ndarray, q: float) -> np.ndarray:
    """Cost of prediction errors along the last axis."""
    magnitude = np.abs(errors)
    if math.isinf(q):
        return magnitude.max(axis=-1)
    if q not in (1.0, 2.0):
        raise ValueError(f"q must be one of 1, 2, inf (got {q!r})")
    return np.mean(magnitude ** q, axis=-1)


def cost(trace: PredictorTrace, series: SeriesData, q: float, lag: int) -> CostReport:
    """Cost of a predictor trace covering levels L..n-1."""
    n = series.n
    check_lag(lag, n)
    expected = np.arange(lag, n)
    if not np.array_equal(trace.levels, expected):
        raise DimensionError(f"trace must cover levels {lag}..{n - 1}")
    errors = series.values[expected + 1] - trace.predictions
    return CostReport(q=q, lag=lag, value=float(aggregate_errors(errors, q)))


@dataclass(frozen=True, eq=False)
class CandidateTable:
    """Predictions of every candidate criterion of one family at levels L..n-1.

    `predictions[kind]` has one row per entry of `criteria[kind]`, in scan order:
    u ascending; (u, v) lexicographic for FD; q1 = 1, 2, ∞ for NEAR_U.
    """
    family: FamilyId
    series: SeriesData
    lag: int
    levels: np.ndarray
    truth: np.ndarray
    criteria: Dict[CriterionKind, Tuple[CriterionId, ...]]
    predictions: Dict[CriterionKind, np.ndarray]

    def costs(self, kind: CriterionKind, q: float) -> np.ndarray:
        return aggregate_errors(self.truth[None, :] - self.predictions[kind], q)

    def candidate(self, kind: CriterionKind, index: int, q: float) -> ScoredCandidate:
        value = float(self.costs(kind, q)[index])
        trace = PredictorTrace(
            levels=self.levels,
            predictions=self.predictions[kind][index],
            criterion=self.criteria[kind][index],
            family=self.family,
        )
        return ScoredCandidate(trace=trace, cost=CostReport(q=q, lag=self.lag, value=value))

    def best(self, kind: CriterionKind, q: float) -> Tuple[int, ScoredCandidate]:
        """First minimizer in scan order."""
        index = int(np.argmin(self.costs(kind, q)))
        return index, self.candidate(kind, index, q)


def _masked_means(means: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Average of `means` over each column's tie set."""
    return (mask * means[:, None]).sum(axis=0) / mask.sum(axis=0)


def build_candidate_table(
    levels: Sequence[ParamMatrix], family: FamilyId, series: SeriesData, lag: int
) -> CandidateTable:
    """Evaluate every criterion and hyperparameter u, v = 0..n at levels L..n-1.

    `levels[l-1]` is the analyzed Θ^(l); only s(0..l) is read at level l.
    """
    n = series.n
    check_lag(lag, n)
    if len(levels) < n - 1:
        raise DimensionError(f"family needs levels up to {n - 1}, has {len(levels)}")
    us = np.arange(n + 1)
    level_range = np.arange(lag, n)
    width = level_range.size

    preds: Dict[CriterionKind, np.ndarray] = {
        CriterionKind.U: np.empty((n + 1, width)),
        CriterionKind.MEAN: np.empty((1, width)),
        CriterionKind.TAIL1: np.empty((n + 1, width)),
        CriterionKind.TAIL2: np.empty((n + 1, width)),
        CriterionKind.MAXCOR: np.empty((1, width)),
        CriterionKind.NEAR_U: np.empty((len(Q_VALUES), width)),
        CriterionKind.VAR: np.empty((n + 1, width)),
        CriterionKind.FD: np.empty(((n + 1) ** 2, width)),
    }

    for col, l in enumerate(level_range):
        pm = levels[l - 1]
        prefix = series.prefix(l)
        means = criteria.row_means(pm, prefix)
        clamped = np.minimum(us, pm.card - 1)
        starts = np.minimum(us, l)

        preds[CriterionKind.U][:, col] = means[clamped]
        preds[CriterionKind.MEAN][0, col] = means.mean()

        tail1 = criteria.extremal_mask(criteria.tail_sums(pm)[:, starts], maximize=True)
        preds[CriterionKind.TAIL1][:, col] = _masked_means(means, tail1)
        tail2 = criteria.extremal_mask(criteria.tail_maxima(pm)[:, starts], maximize=True)
        preds[CriterionKind.TAIL2][:, col] = _masked_means(means, tail2)

        maxcor = criteria.extremal_mask(criteria.maxcor_scores(pm), maximize=True)
        preds[CriterionKind.MAXCOR][0, col] = means[maxcor].mean()
        for k, q1 in enumerate(Q_VALUES):
            near = criteria.extremal_mask(criteria.near_uniform_distances(pm, q1), maximize=False)
            preds[CriterionKind.NEAR_U][k, col] = means[near].mean()

        order = criteria.variance_order(pm, prefix)
        preds[CriterionKind.VAR][:, col] = means[order[clamped]]

        orders = criteria.distance_orders(pm, prefix)
        grid = means[orders[starts][:, clamped]]
        preds[CriterionKind.FD][:, col] = grid.ravel()

    for arr in preds.values():
        arr.setflags(write=False)

    scans: Dict[CriterionKind, Tuple[CriterionId, ...]] = {
        CriterionKind.U: tuple(CriterionId(CriterionKind.U, u=int(u)) for u in us),
        CriterionKind.MEAN: (CriterionId(CriterionKind.MEAN),),
        CriterionKind.TAIL1: tuple(CriterionId(CriterionKind.TAIL1, u=int(u)) for u in us),
        CriterionKind.TAIL2: tuple(CriterionId(CriterionKind.TAIL2, u=int(u)) for u in us),
        CriterionKind.MAXCOR: (CriterionId(CriterionKind.MAXCOR),),
        CriterionKind.NEAR_U: tuple(CriterionId(CriterionKind.NEAR_U, q1=q1) for q1 in Q_VALUES),
        CriterionKind.VAR: tuple(CriterionId(CriterionKind.VAR, u=int(u)) for u in us),
        CriterionKind.FD: tuple(
            CriterionId(CriterionKind.FD, u=int(u), v=int(v)) for u in us for v in us
        ),
    }
    return CandidateTable(
        family=FamilyId(family),
        series=series,
        lag=lag,
        levels=level_range,
        truth=series.values[level_range + 1],
        criteria=scans,
        predictions=preds,
    )


# --- Hyperparameter scans --- #

def optimize_u(table: CandidateTable, kind: CriterionKind, q: float) -> Tuple[int, ScoredCandidate]:
    """Best u in 0..n for a u-indexed criterion; ties go to the smallest u."""
    if kind not in U_SCAN_KINDS:
        raise ValueError(f"{kind} is not scanned over u")
    index, candidate = table.best(kind, q)
    return candidate.criterion.u, candidate


def optimize_uv_fd(table: CandidateTable, q: float) -> Tuple[int, int, ScoredCandidate]:
    """Best (u, v) on the (n+1)² grid; ties go to the lexicographically smallest pair."""
    _, candidate = table.best(CriterionKind.FD, q)
    return candidate.criterion.u, candidate.criterion.v, candidate


def optimize_q1_near_uniform(table: CandidateTable, q: float) -> Tuple[float, ScoredCandidate]:
    """Best q1 scanned as 1, 2, ∞; ties go to the earlier one."""
    _, candidate = table.best(CriterionKind.NEAR_U, q)
    return candidate.criterion.q1, candidate


def best_of_kind(table: CandidateTable, kind: CriterionKind, q: float) -> ScoredCandidate:
    """Winner of one criterion family (the challenger of a cascade stage)."""
    if kind in U_SCAN_KINDS:
        return optimize_u(table, kind, q)[1]
    if kind is CriterionKind.FD:
        return optimize_uv_fd(table, q)[2]
    if kind is CriterionKind.NEAR_U:
        return optimize_q1_near_uniform(table, q)[1]
    return table.best(kind, q)[1]


# --- Exhaustive oracle --- #

def enumerate_criteria(n: int) -> List[CriterionId]:
    us = range(n + 1)
    found: List[CriterionId] = [CriterionId(CriterionKind.MEAN), CriterionId(CriterionKind.MAXCOR)]
    for kind in U_SCAN_KINDS:
        found.extend(CriterionId(kind, u=u) for u in us)
    found.extend(CriterionId(CriterionKind.NEAR_U, q1=q1) for q1 in Q_VALUES)
    found.extend(CriterionId(CriterionKind.FD, u=u, v=v) for u in us for v in us)
    return found


def trace_of(
    levels: Sequence[ParamMatrix], criterion: CriterionId, series: SeriesData, lag: int,
    family: Optional[FamilyId] = None,
) -> PredictorTrace:
    """Predictions of one criterion built row by row through criteria.apply_criterion."""
    level_range = np.arange(lag, series.n)
    predictions = []
    for l in level_range:
        prefix = series.prefix(int(l))
        row = criteria.apply_criterion(levels[l - 1], criterion, prefix)
        predictions.append(row.apply(prefix))
    return PredictorTrace(levels=level_range, predictions=np.array(predictions), criterion=criterion, family=family)


def brute_force_minimum(
    levels: Sequence[ParamMatrix], series: SeriesData, q: float, lag: int
) -> Tuple[CriterionId, CostReport]:
    """Minimal cost over every criterion and hyperparameter, evaluated independently of the table."""
    check_lag(lag, series.n)
    best = None
    for criterion in enumerate_criteria(series.n):
        report = cost(trace_of(levels, criterion, series, lag), series, q, lag)
        if best is None or report.value < best[1].value:
            best = (criterion, report)
    return best
