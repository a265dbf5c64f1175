"""
Shared state schema for the experiment graph.

This module defines the TypedDict that flows through the LangGraph StateGraph;
the supervisor reads it to pick the next experiment and every experiment node
files its report into it.
"""

from typing import Sequence, TypedDict

from .config import ExperimentConfig
from .reports import ExperimentReport


class ExperimentState(TypedDict):
    """
    Shared state for one geolab run.

    Attributes:
        config: Validated configuration shared by all experiments
        pending: Experiments requested for this run
        completed: Experiments that have filed a report
        reports: Reports keyed by experiment name
        next_experiment: Routing control set by the supervisor
    """
    config: ExperimentConfig
    pending: list[str]
    completed: list[str]
    reports: dict[str, ExperimentReport]
    next_experiment: str


def create_initial_state(config: ExperimentConfig, experiments: Sequence[str]) -> ExperimentState:
    """
    Create the initial state for a run.

    Args:
        config: The validated experiment configuration
        experiments: Names of the experiments to run

    Returns:
        An ExperimentState with nothing completed yet
    """
    return ExperimentState(
        config=config,
        pending=list(experiments),
        completed=[],
        reports={},
        next_experiment="",
    )
