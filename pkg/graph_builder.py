"""LangGraph construction of the winner cascade.

    seed (S_mean) → S1 (S_u) → S2 (tail1) → S3 (tail2) → S4 (maxcor)
                  → S5 (nearU) → S6 (var) → S7 (fd) → end
"""

from langgraph.graph import END, StateGraph

from backtest import CandidateTable
from models import CASCADE_CHALLENGERS, CascadeState
from nodes import seed_node, stage_node
from utilities import log_event


def stage_name(stage: int) -> str:
    return f"stage_{stage}"


def _bind_stage(table: CandidateTable, stage: int, verbose: bool):
    return lambda state: stage_node(state, table, stage, verbose)


def create_cascade_graph(table: CandidateTable, verbose: bool = False):
    """
    Create and compile the cascade graph for one family.

    Args:
        table: Candidate predictions of the family (shared by every q)
        verbose: Enable per-stage console lines

    Returns:
        Compiled graph; invoke it with a CascadeState for one q
    """
    graph = StateGraph(CascadeState)
    graph.add_node("seed", lambda state: seed_node(state, table, verbose))
    for stage in range(1, len(CASCADE_CHALLENGERS) + 1):
        graph.add_node(stage_name(stage), _bind_stage(table, stage, verbose))

    graph.set_entry_point("seed")
    previous = "seed"
    for stage in range(1, len(CASCADE_CHALLENGERS) + 1):
        graph.add_edge(previous, stage_name(stage))
        previous = stage_name(stage)
    graph.add_edge(previous, END)

    compiled = graph.compile()
    log_event("GRAPH", verbose, family=table.family.value, stages=len(CASCADE_CHALLENGERS))
    return compiled


def visualize_graph(graph) -> str:
    """Mermaid text of a compiled cascade graph."""
    return graph.get_graph().draw_mermaid()
