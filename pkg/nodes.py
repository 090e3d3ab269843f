"""LangGraph node implementations for the S₁..S₇ winner cascade."""

from typing import Any, Dict

from backtest import CandidateTable, best_of_kind
from models import CASCADE_CHALLENGERS, CascadeState, CriterionKind, ScoredCandidate, StageRecord
from utilities import log_event, log_stage_execution, track_stage


def _prefer_challenger(challenger: ScoredCandidate, incumbent: ScoredCandidate) -> bool:
    # The incumbent keeps the title on ties.
    return challenger.cost.value < incumbent.cost.value


def seed_node(state: CascadeState, table: CandidateTable, verbose: bool = False) -> Dict[str, Any]:
    """Install S_mean as the first incumbent."""
    _, mean = table.best(CriterionKind.MEAN, state["q"])
    log_event(
        "NODE:SEED",
        verbose,
        family=state["family"],
        q=state["q"],
        incumbent=mean.criterion.label,
        cost=mean.cost.value,
    )
    return {"incumbent": mean, "challenger": None, "stage": 0}


def stage_node(state: CascadeState, table: CandidateTable, stage: int, verbose: bool = False) -> Dict[str, Any]:
    """Stage k: the best candidate of the k-th criterion family against the previous winner."""
    old_state = dict(state)
    q = state["q"]
    kind = CASCADE_CHALLENGERS[stage - 1]
    challenger = best_of_kind(table, kind, q)
    incumbent = state["incumbent"]
    winner = challenger if _prefer_challenger(challenger, incumbent) else incumbent

    record = StageRecord(
        stage=stage,
        challenger=challenger.criterion.label,
        challenger_cost=challenger.cost.value,
        winner=winner.criterion.label,
        winner_cost=winner.cost.value,
    )
    new_state = {
        "incumbent": winner,
        "challenger": challenger,
        "stage": stage,
        "stage_history": track_stage(state["stage_history"], record),
        "stage_winners": list(state["stage_winners"]) + [winner],
    }
    log_stage_execution(stage, old_state, {**old_state, **new_state}, verbose)
    return new_state
