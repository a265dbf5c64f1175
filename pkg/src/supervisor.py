"""
Supervisor - routes the run through the requested experiments.

Experiments run one at a time in a fixed order; each one parallelizes
internally.
"""

import logging
from typing import Literal

from .state import ExperimentState

logger = logging.getLogger(__name__)

# Canonical order of the experiment nodes
EXPERIMENT_ORDER = ("torus", "hyperbolic", "convexity", "halfspace")
ROUTING_OPTIONS = Literal["torus", "hyperbolic", "convexity", "halfspace", "FINISH"]


def create_supervisor():
    """
    Create the Supervisor node.

    Returns:
        A node function that sets `next_experiment` to the first pending,
        not yet completed experiment in canonical order, or FINISH
    """
    def supervisor_node(state: ExperimentState) -> dict:
        pending = set(state.get("pending", []))
        completed = set(state.get("completed", []))

        next_experiment = "FINISH"
        for name in EXPERIMENT_ORDER:
            if name in pending and name not in completed:
                next_experiment = name
                break

        logger.debug("[GRAPH] Routing to %s", next_experiment)
        return {
            "next_experiment": next_experiment,
        }

    return supervisor_node


def route_to_experiment(state: ExperimentState) -> ROUTING_OPTIONS:
    """
    Conditional edge function to route to the next experiment node.

    Args:
        state: Current run state

    Returns:
        The name of the next experiment node or "FINISH"
    """
    return state.get("next_experiment") or "FINISH"
