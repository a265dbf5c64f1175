"""
LangGraph StateGraph Definition.

This module constructs the experiment graph: a supervisor node that routes
through the requested experiments in canonical order, with every experiment
node returning to the supervisor when its report is filed.
"""

import logging
from typing import Optional, Sequence

from langgraph.graph import END, START, StateGraph

from .config import EXPERIMENTS, ExperimentConfig
from .errors import ConfigError
from .experiments import (
    create_convexity_node,
    create_halfspace_node,
    create_hyperbolic_node,
    create_torus_node,
)
from .reports import ExperimentReport
from .state import ExperimentState, create_initial_state
from .supervisor import EXPERIMENT_ORDER, create_supervisor, route_to_experiment

logger = logging.getLogger(__name__)


def create_experiment_graph(max_workers: Optional[int] = None):
    """
    Create the geolab experiment LangGraph.

    The Supervisor node picks the next pending experiment; each experiment
    node runs its checks, files an ExperimentReport and hands control back.

    Args:
        max_workers: thread cap passed to the experiments' parallel sweeps

    Returns:
        Compiled LangGraph ready for execution

    Example:
        >>> graph = create_experiment_graph(max_workers=4)
        >>> result = graph.invoke(create_initial_state(config, ["torus"]))
    """
    graph = StateGraph(ExperimentState)

    graph.add_node("supervisor", create_supervisor())

    graph.add_node("torus", create_torus_node(max_workers))
    graph.add_node("hyperbolic", create_hyperbolic_node(max_workers))
    graph.add_node("convexity", create_convexity_node(max_workers))
    graph.add_node("halfspace", create_halfspace_node(max_workers))

    graph.add_edge(START, "supervisor")

    graph.add_conditional_edges(
        "supervisor",
        route_to_experiment,
        {
            "torus": "torus",
            "hyperbolic": "hyperbolic",
            "convexity": "convexity",
            "halfspace": "halfspace",
            "FINISH": END,
        }
    )

    # Experiments return to supervisor after filing their report
    for name in EXPERIMENT_ORDER:
        graph.add_edge(name, "supervisor")

    return graph.compile()


def run_experiments(
    config: ExperimentConfig,
    experiments: Sequence[str],
    max_workers: Optional[int] = None,
) -> list[ExperimentReport]:
    """
    Run the named experiments through the graph and collect their reports.

    Returns:
        Reports in canonical experiment order

    Raises:
        ConfigError: an unknown experiment name
    """
    unknown = [e for e in experiments if e not in EXPERIMENTS]
    if unknown:
        raise ConfigError(f"Unknown experiment(s) {unknown}, expected any of {EXPERIMENTS}")

    graph = create_experiment_graph(max_workers)
    reports: dict[str, ExperimentReport] = {}
    # Stream node updates; the last report update holds every filed report
    for event in graph.stream(create_initial_state(config, experiments), stream_mode="updates"):
        for node_name, node_output in event.items():
            if node_output and node_output.get("reports"):
                reports.update(node_output["reports"])
                logger.info("[GRAPH] %s done", node_name)
    return [reports[name] for name in EXPERIMENT_ORDER if name in reports]


def run_all(config: ExperimentConfig, max_workers: Optional[int] = None) -> list[ExperimentReport]:
    """Run every experiment through the graph."""
    return run_experiments(config, EXPERIMENTS, max_workers)


def get_graph_visualization(graph) -> str:
    """
    Get a Mermaid diagram representation of the graph.

    Args:
        graph: Compiled LangGraph

    Returns:
        Mermaid diagram string
    """
    try:
        return graph.get_graph().draw_mermaid()
    except Exception:
        return "Graph visualization not available"
