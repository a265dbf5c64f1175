"""
Torus experiment - cut-locus orders on flat tori.

Finds the farthest point from the origin (the deep hole), then measures the
order of the farthest point from every point of a grid and the order map of
the origin over a grid of targets.
"""

import logging
from typing import Callable, Optional

import numpy as np

from ..config import ExperimentConfig
from ..geometry.quotient_metric import (
    default_seeds,
    find_farthest_point,
    order_map,
    relative_min_tol,
    segment_bundle,
)
from ..reports import ExperimentReport
from ..state import ExperimentState
from .utils import experiment_run, make_experiment_node, new_report

logger = logging.getLogger(__name__)


def _grid(basis: np.ndarray, size: int) -> np.ndarray:
    """Cell-centred size x size grid of the fundamental parallelepiped."""
    c = (np.arange(size) + 0.5) / size
    coeffs = np.stack(np.meshgrid(c, c, indexing="ij"), axis=-1).reshape(-1, 2)
    return coeffs @ basis


def run_torus(config: ExperimentConfig, max_workers: Optional[int] = None) -> ExperimentReport:
    """
    Orders of farthest points and of grid targets on R^2 / lattice.

    Claims: every local max of the pointed distance has order >= n + 1; when
    space.expected_max_order is set, the largest order seen equals it.
    """
    report = new_report("torus", config)
    with experiment_run(report, config):
        space = config.lattice_space()
        n = space.model.dimension
        tol = config.tolerances
        min_tol = relative_min_tol(tol.min_tol)
        origin = space.base_lift

        seeds = [q for _, q in default_seeds(space, config.samples.seeds, config.samples.seed)]
        far = find_farthest_point(
            space, origin, seeds, config.search_settings(), seed=config.samples.seed, max_workers=max_workers
        )
        bundle = segment_bundle(space, origin, far.p2, min_tol=min_tol, dir_tol=tol.dir_tol, sep_tol=tol.sep_tol)
        report.measurements["lattice"] = space.basis.tolist()
        report.measurements["deep_hole"] = {**far.to_dict(), "bundle": bundle.to_dict()}
        report.add_claim(
            "torus.deep_hole_order",
            "a local maximum of the pointed distance is reached by at least n+1 minimizing segments",
            bundle.order >= n + 1,
            bundle.order,
            f">= {n + 1}",
        )

        # Translation invariance: the farthest point from p is p + (deep hole - origin).
        offset = far.p2 - origin
        starts = _grid(space.basis, config.samples.grid)
        far_orders = np.array([
            segment_bundle(space, p, p + offset, min_tol=min_tol, dir_tol=tol.dir_tol, sep_tol=tol.sep_tol).order
            for p in starts
        ])
        report.measurements["farthest_sample"] = {
            "points": len(starts),
            "min_order": int(far_orders.min()),
            "max_order": int(far_orders.max()),
        }
        report.add_claim(
            "torus.farthest_sample_order",
            "every farthest point is reached by at least n+1 minimizing segments",
            int(far_orders.min()) >= n + 1,
            int(far_orders.min()),
            f">= {n + 1}",
        )

        targets = _grid(space.basis, config.samples.grid)
        orders = order_map(space, origin, targets, min_tol=min_tol, sep_tol=tol.sep_tol)
        counts = {int(k): int(v) for k, v in zip(*np.unique(orders, return_counts=True))}
        report.measurements["order_map"] = {"points": len(targets), "histogram": counts}
        report.samples = [
            {"x": float(x), "y": float(y), "order": int(o)} for (x, y), o in zip(targets, orders)
        ]

        max_order = max(int(far_orders.max()), int(orders.max()), bundle.order)
        report.measurements["max_order"] = max_order
        expected = config.space.expected_max_order
        if expected is not None:
            report.add_claim(
                "torus.max_order",
                "the largest cut-locus order over the sample matches the lattice's maximal order",
                max_order == expected,
                max_order,
                expected,
            )
    return report


def create_torus_node(max_workers: Optional[int] = None) -> Callable[[ExperimentState], dict]:
    """
    Create the torus experiment node for the LangGraph.
    """
    return make_experiment_node("torus", run_torus, max_workers)
