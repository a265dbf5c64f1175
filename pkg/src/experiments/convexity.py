"""
Convexity experiment - midpoint, comparison and profile checks in the hyperbolic plane.
"""

import logging
from typing import Callable, Optional

import numpy as np

from ..config import ExperimentConfig
from ..geometry.convexity_lab import (
    Classification,
    ConvexityReport,
    classify_product_direction,
    comparison_sweep,
    midpoint_check,
    midpoint_sweep,
    pointed_convexity_profile,
    product_convexity_profile,
)
from ..geometry.model_spaces import ModelSpace, exp_map, geodesic, random_point
from ..reports import ExperimentReport
from ..state import ExperimentState
from .utils import experiment_run, make_experiment_node, new_report

logger = logging.getLogger(__name__)

# Equality in the midpoint inequality on the collinear fixture
EQUALITY_TOL = 1e-9


def _along(space: ModelSpace, direction, ts) -> list:
    """Points at signed distances ts from the origin along one geodesic."""
    o = space.origin()
    v = np.zeros(space.ambient_dimension)
    v[-space.dimension:] = direction
    v /= np.linalg.norm(v)
    return [exp_map(space, o, t * v) for t in ts]


def _profile_rows(name: str, profile: ConvexityReport) -> list[dict]:
    return [{"profile": name, **row} for row in profile.rows()]


def run_convexity(config: ExperimentConfig, max_workers: Optional[int] = None) -> ExperimentReport:
    """
    Convexity of the distance in H^2.

    Claims: the midpoint inequality is strict off the collinear band and the
    interior-t inequality always holds; chords are no longer than comparison
    chords in curvature 0 and match them in the space's own curvature; the
    collinear fixture attains equality and is constant along the exceptional
    line; distance profiles from a point are never constant.
    """
    report = new_report("convexity", config)
    with experiment_run(report, config):
        space = ModelSpace.hyperbolic(2, config.space.curvature)
        samples = config.samples
        tol_conv = config.tolerances.tol_conv

        sweep = midpoint_sweep(space, samples.trials, seed=samples.seed, max_workers=max_workers)
        report.measurements["midpoint_sweep"] = sweep.to_dict()
        report.add_claim(
            "convexity.midpoint_strict",
            "the midpoint inequality is strict for quadruples not on one maximal geodesic",
            sweep.violations == 0,
            sweep.violations,
            0,
            detail=f"{sweep.collinear_skipped} collinear quadruples skipped",
        )
        report.add_claim(
            "convexity.interior_inequality",
            "the distance along a product geodesic lies below the chord at every interior t",
            sweep.interior_violations == 0,
            sweep.interior_violations,
            0,
        )

        same = comparison_sweep(
            space, samples.comparison_trials, space.curvature, seed=samples.seed, max_workers=max_workers
        )
        flat = comparison_sweep(space, samples.comparison_trials, 0.0, seed=samples.seed + 1, max_workers=max_workers)
        report.measurements["comparison_sweep"] = {"same_curvature": same.to_dict(), "flat": flat.to_dict()}
        report.add_claim(
            "convexity.comparison_exact",
            "a triangle in the model space of curvature chi agrees with its own comparison triangle",
            same.max_abs_error <= tol_conv,
            same.max_abs_error,
            f"<= {tol_conv:g}",
        )
        report.add_claim(
            "convexity.comparison_flat",
            "chords in nonpositive curvature are no longer than their euclidean comparison chords",
            flat.violations == 0,
            flat.violations,
            0,
        )

        # Two segments sliding along one geodesic at equal speed
        p1, q1, p2, q2 = _along(space, [1.0, 0.3], [0.0, 1.0, 0.5, 1.5])
        equality = midpoint_check(space, p1, q1, p2, q2)
        collinear = product_convexity_profile(
            geodesic(space, p1, q1), geodesic(space, p2, q2), n_samples=samples.profile_samples, tol=tol_conv
        )
        report.measurements["collinear_fixture"] = {
            "midpoint": equality._asdict(),
            "profile": collinear.to_dict(),
        }
        report.add_claim(
            "convexity.collinear_equality",
            "the midpoint inequality is an equality for four points on one geodesic",
            abs(equality.rhs - equality.lhs) <= EQUALITY_TOL and not equality.strict,
            equality.rhs - equality.lhs,
            f"|gap| <= {EQUALITY_TOL:g}",
        )
        u1, u2 = collinear.exceptional_direction or ((), ())
        on_line = bool(u1) and classify_product_direction(space, p1, p2, u1, u2) == "constant"
        report.add_claim(
            "convexity.exceptional_line",
            "the distance is constant along the line where both points slide along their joining geodesic",
            collinear.exceptional_direction_detected
            and collinear.classification is Classification.CONVEX_CONSTANT_ON_LINE
            and on_line,
            collinear.classification.value,
            Classification.CONVEX_CONSTANT_ON_LINE.value,
        )

        rng = np.random.default_rng(samples.seed)
        a, b, c, d = (random_point(space, rng) for _ in range(4))
        generic = product_convexity_profile(
            geodesic(space, a, b), geodesic(space, c, d), n_samples=samples.profile_samples, tol=tol_conv
        )
        report.measurements["generic_profile"] = generic.to_dict()
        report.add_claim(
            "convexity.generic_strict",
            "off the exceptional line the distance is strictly convex along product geodesics",
            generic.classification is Classification.STRICTLY_CONVEX,
            generic.min_margin,
            f"> {tol_conv:g}",
        )

        # A geodesic missing p and one running through p
        p = random_point(space, rng)
        x, y = _along(space, [0.2, 1.0], [-1.0, 1.0])
        off = pointed_convexity_profile(space, p, geodesic(space, x, y), n_samples=samples.profile_samples, tol=tol_conv)
        through = pointed_convexity_profile(
            space, space.origin(), geodesic(space, x, y), n_samples=samples.profile_samples, tol=tol_conv
        )
        report.measurements["pointed_profiles"] = {"off_point": off.to_dict(), "through_point": through.to_dict()}
        smallest_range = min(off.value_range, through.value_range)
        report.add_claim(
            "convexity.pointed_nonconstant",
            "the distance from a point is convex and never constant along a nontrivial geodesic",
            smallest_range > tol_conv
            and Classification.VIOLATION not in (off.classification, through.classification),
            smallest_range,
            f"> {tol_conv:g}",
        )

        report.samples = (
            _profile_rows("collinear", collinear)
            + _profile_rows("generic", generic)
            + _profile_rows("pointed_off", off)
            + _profile_rows("pointed_through", through)
        )
    return report


def create_convexity_node(max_workers: Optional[int] = None) -> Callable[[ExperimentState], dict]:
    """
    Create the convexity experiment node for the LangGraph.
    """
    return make_experiment_node("convexity", run_convexity, max_workers)
