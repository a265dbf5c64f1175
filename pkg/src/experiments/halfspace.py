"""
Half-space experiment - falsification sweep for covers of R^n by closed half-spaces.
"""

import logging
from typing import Callable, Optional

from ..config import ExperimentConfig
from ..geometry.convexity_lab import HalfspaceSystem, halfspace_cover_check, halfspace_sweep
from ..reports import ExperimentReport
from ..state import ExperimentState
from .utils import experiment_run, make_experiment_node, new_report

logger = logging.getLogger(__name__)

# (name, normals, sides, expected covers)
FIXTURES = (
    ("coincident_opposite", [[0.0, 1.0], [0.0, 1.0]], [1, -1], True),
    ("coordinate_axes", [[0.0, 1.0], [1.0, 0.0]], [1, 1], False),
)


def run_halfspace(config: ExperimentConfig, max_workers: Optional[int] = None) -> ExperimentReport:
    """
    Claims: no random system covers R^n while its hyperplanes meet in a
    subspace of dimension below n - k + 1; the fixtures decide as expected.
    """
    report = new_report("halfspace", config)
    with experiment_run(report, config):
        samples = config.samples

        for name, normals, sides, expected in FIXTURES:
            result = halfspace_cover_check(
                HalfspaceSystem.from_normals(normals, sides), samples.halfspace_samples, seed=samples.seed
            )
            report.measurements[f"fixture_{name}"] = result.to_dict()
            report.samples.append({"fixture": name, "covers": result.covers, "dim_intersection": result.dim_intersection})
            report.add_claim(
                f"halfspace.fixture_{name}",
                "closed half-spaces of R^n cover it only if their hyperplanes share a subspace of dimension >= n-k+1",
                result.covers == expected and result.consistent,
                result.covers,
                expected,
            )

        sweep = halfspace_sweep(
            samples.systems,
            n_samples=samples.halfspace_samples,
            seed=samples.seed,
            max_dim=samples.max_dim,
            max_workers=max_workers,
        )
        report.measurements["sweep"] = sweep.to_dict()
        report.add_claim(
            "halfspace.no_counterexample",
            "k closed half-spaces covering R^n have hyperplanes meeting in a subspace of dimension >= n-k+1",
            sweep.counterexamples == 0,
            sweep.counterexamples,
            0,
            detail=f"{sweep.covering} of {sweep.systems} systems cover",
        )
    return report


def create_halfspace_node(max_workers: Optional[int] = None) -> Callable[[ExperimentState], dict]:
    """
    Create the half-space experiment node for the LangGraph.
    """
    return make_experiment_node("halfspace", run_halfspace, max_workers)
