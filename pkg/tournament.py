"""Cascade driver and selection of the optimal parametrization Θ*(q)."""

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from backtest import CandidateTable, build_candidate_table, check_lag
from criteria import apply_criterion
from energy_matrices import build_family
from errors import DimensionError
from graph_builder import create_cascade_graph
from models import (
    CascadeState,
    FamilyId,
    ParamMatrix,
    SeriesData,
    TournamentResult,
    make_initial_cascade_state,
    q_label,
)
from parametrization import DEFAULT_TOL_REL, analyze_family
from utilities import log_event


@dataclass(frozen=True, eq=False)
class PreparedFamily:
    """A family analyzed to level n with its candidate table for lag L."""
    id: FamilyId
    levels: Tuple[ParamMatrix, ...]
    table: CandidateTable

    def level(self, l: int) -> ParamMatrix:
        return self.levels[l - 1]


def prepare_family(
    family_id: FamilyId,
    series: SeriesData,
    lag: int,
    tol_rel: float = DEFAULT_TOL_REL,
    workers: int = 1,
    verbose: bool = False,
) -> PreparedFamily:
    family_id = FamilyId(family_id)
    check_lag(lag, series.n)
    family = build_family(family_id, series.n, workers=workers)
    levels = analyze_family(family, tol_rel)
    table = build_candidate_table(levels, family_id, series, lag)
    log_event("FAMILY", verbose, family=family_id.value, n=series.n, lag=lag)
    return PreparedFamily(id=family_id, levels=levels, table=table)


def prepare_families(
    family_ids: Iterable[FamilyId],
    series: SeriesData,
    lag: int,
    tol_rel: float = DEFAULT_TOL_REL,
    workers: int = 1,
    verbose: bool = False,
) -> List[PreparedFamily]:
    return [prepare_family(f, series, lag, tol_rel, workers, verbose) for f in family_ids]


def cascade(prepared: PreparedFamily, q: float, verbose: bool = False) -> CascadeState:
    """Run S₁..S₇ for one family and q; `stage_winners[k-1]` is S_k."""
    graph = create_cascade_graph(prepared.table, verbose)
    initial = make_initial_cascade_state(prepared.id, q, prepared.table.lag)
    return graph.invoke(initial)


def select_parametrization(
    families: Sequence[PreparedFamily], series: SeriesData, q: float, verbose: bool = False
) -> TournamentResult:
    """Family with the smallest S₇ cost (ties by list order), with its predictions."""
    if not families:
        raise DimensionError("at least one parametrization family is required")
    n = series.n
    best = None
    family_costs = {}
    for prepared in families:
        if prepared.table.series is not series and not np.array_equal(prepared.table.series.values, series.values):
            raise DimensionError(f"family {prepared.id.value} was prepared for a different series")
        final = cascade(prepared, q, verbose)
        winner = final["stage_winners"][-1]
        family_costs[prepared.id.value] = winner.cost.value
        if best is None or winner.cost.value < best[1]["stage_winners"][-1].cost.value:
            best = (prepared, final)

    prepared, final = best
    winner = final["stage_winners"][-1]
    final_weights = apply_criterion(prepared.level(n), winner.criterion, series.values)
    result = TournamentResult(
        q=q,
        lag=prepared.table.lag,
        family=prepared.id,
        winner=winner,
        criterion_cost=winner.cost.value,
        stages=tuple(final["stage_history"]),
        family_costs=family_costs,
        backtest_prediction=float(winner.trace.predictions[-1]),
        true_value=float(series.values[n]),
        forecast=final_weights.apply(series.values),
        final_weights=final_weights,
    )
    log_event(
        "SELECT",
        verbose,
        q=q_label(q),
        family=prepared.id.value,
        criterion=winner.criterion.label,
        cost=winner.cost.value,
    )
    return result


def run_tournament(
    families: Sequence[PreparedFamily], series: SeriesData, qs: Iterable[float], verbose: bool = False
) -> List[TournamentResult]:
    return [select_parametrization(families, series, q, verbose) for q in qs]
