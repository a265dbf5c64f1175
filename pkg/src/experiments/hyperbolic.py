"""
Hyperbolic experiment - local maxima of the distance on the genus-2 surface.
"""

import logging
import math
from dataclasses import replace
from typing import Callable, Optional

import numpy as np

from ..config import ExperimentConfig
from ..geometry.deck_groups import OCTAGON_RELATOR, evaluate_word_matrices, translation_length
from ..geometry.model_spaces import tangent_frame, tangent_inner
from ..geometry.quotient_metric import (
    SegmentBundle,
    default_seeds,
    find_farthest_point,
    find_max_pair,
    lines_in_general_position,
    relative_min_tol,
    segment_bundle,
    strict_max_probe,
)
from ..reports import ExperimentReport
from ..state import ExperimentState
from .utils import experiment_run, make_experiment_node, new_report

logger = logging.getLogger(__name__)


def _segment_rows(kind: str, bundle: SegmentBundle) -> list[dict]:
    model = bundle.space.model
    frame = tangent_frame(model, bundle.p1)
    rows = []
    for i, seg in enumerate(bundle.segments):
        c = [float(tangent_inner(model, e, seg.initial_direction)) for e in frame]
        rows.append({
            "kind": kind,
            "segment": i,
            "length": seg.length,
            "angle": math.atan2(c[1], c[0]),
        })
    return rows


def run_hyperbolic(config: ExperimentConfig, max_workers: Optional[int] = None) -> ExperimentReport:
    """
    Pair maximum and pointed maximum of the distance on the octagon surface.

    Claims: the pair max is reached by at least 2n+1 segments, is a stagnation
    point of the search and survives the strictness probe; the farthest point
    from the base point is reached by at least n+1 segments.
    """
    report = new_report("hyperbolic", config)
    with experiment_run(report, config):
        space = config.surface_space()
        n = space.model.dimension
        tol = config.tolerances
        min_tol = relative_min_tol(tol.min_tol)
        settings = config.search_settings()
        samples = config.samples

        relator = evaluate_word_matrices([g.data for g in space.generators], OCTAGON_RELATOR)
        report.measurements["surface"] = {
            "name": space.name,
            "curvature": space.model.curvature,
            "relator_error": float(np.max(np.abs(relator - np.eye(3)))),
            "translation_lengths": [translation_length(g, space.model) for g in space.generators],
            "injectivity_floor": space.injectivity_floor,
            "circumradius": space.circumradius,
        }

        seeds = default_seeds(space, samples.seeds, samples.seed)
        pair = find_max_pair(space, seeds, settings, seed=samples.seed, max_workers=max_workers)
        bundle = segment_bundle(space, pair.p1, pair.p2, min_tol=min_tol, dir_tol=tol.dir_tol, sep_tol=tol.sep_tol)
        certificate = strict_max_probe(
            space,
            pair,
            tol.probe_radius,
            n_dirs=samples.probe_directions,
            seed=samples.seed,
            min_tol=min_tol,
            sep_tol=tol.sep_tol,
        )
        pair = replace(pair, certificate=certificate)
        report.measurements["pair_max"] = {
            **pair.to_dict(),
            "bundle": bundle.to_dict(),
            "lines_in_general_position": lines_in_general_position(bundle, tol.dir_tol),
        }
        report.add_claim(
            "hyperbolic.pair_max_order",
            "a local maximum of the distance on M x M is joined by at least 2n+1 minimizing segments",
            bundle.order >= 2 * n + 1,
            bundle.order,
            f">= {2 * n + 1}",
        )
        report.add_claim(
            "hyperbolic.pair_max_stagnation",
            "pattern search stagnated: no poll direction improves at the step floor",
            pair.final_step < config.search.step_floor,
            pair.final_step,
            f"< {config.search.step_floor:g}",
        )
        report.add_claim(
            "hyperbolic.pair_max_strict",
            "the distance function strictly decreases in every direction away from a local maximum pair",
            certificate.margin > 0.0,
            certificate.margin,
            "> 0",
            detail="" if certificate.radius_ok else "probe radius not below fiber_gap/4",
        )

        p1 = space.base_lift
        targets = [q for _, q in seeds]
        far = find_farthest_point(space, p1, targets, settings, seed=samples.seed, max_workers=max_workers)
        pointed = segment_bundle(space, p1, far.p2, min_tol=min_tol, dir_tol=tol.dir_tol, sep_tol=tol.sep_tol)
        report.measurements["pointed_max"] = {**far.to_dict(), "bundle": pointed.to_dict()}
        report.add_claim(
            "hyperbolic.pointed_max_order",
            "a local maximum of the distance from a fixed point is reached by at least n+1 minimizing segments",
            pointed.order >= n + 1,
            pointed.order,
            f">= {n + 1}",
        )

        report.samples = _segment_rows("pair_max", bundle) + _segment_rows("pointed_max", pointed)
    return report


def create_hyperbolic_node(max_workers: Optional[int] = None) -> Callable[[ExperimentState], dict]:
    """
    Create the hyperbolic experiment node for the LangGraph.
    """
    return make_experiment_node("hyperbolic", run_hyperbolic, max_workers)
