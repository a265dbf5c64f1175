"""
Geometry kernels: model spaces, deck groups, quotient distances and convexity checks.
"""

from .model_spaces import (
    ModelSpace,
    SpaceKind,
    GeodesicSegment,
    ComparisonTriangle,
    distance,
    interpolate,
    log_map,
    exp_map,
    geodesic,
    comparison_triangle,
    comparison_point,
    collinearity_residual,
)
from .deck_groups import (
    Isometry,
    OrbitPoint,
    QuotientSpace,
    apply,
    lattice_orbit,
    fuchsian_orbit,
    octagon_group,
    lattice_group,
    fiber_gap,
    reduce_to_domain,
    translation_length,
    load_quotient_space,
    save_quotient_space,
)
from .quotient_metric import (
    SegmentBundle,
    MaxPair,
    MaxKind,
    ProbeCertificate,
    DistanceEnvelope,
    SearchSettings,
    quotient_distance,
    relative_min_tol,
    segment_bundle,
    find_max_pair,
    find_farthest_point,
    strict_max_probe,
)
from .convexity_lab import (
    Classification,
    ConvexityReport,
    HalfspaceSystem,
    midpoint_check,
    comparison_check,
    product_convexity_profile,
    pointed_convexity_profile,
    halfspace_cover_check,
)

__all__ = [
    "ModelSpace",
    "SpaceKind",
    "GeodesicSegment",
    "ComparisonTriangle",
    "distance",
    "interpolate",
    "log_map",
    "exp_map",
    "geodesic",
    "comparison_triangle",
    "comparison_point",
    "collinearity_residual",
    "Isometry",
    "OrbitPoint",
    "QuotientSpace",
    "apply",
    "lattice_orbit",
    "fuchsian_orbit",
    "octagon_group",
    "lattice_group",
    "fiber_gap",
    "reduce_to_domain",
    "translation_length",
    "load_quotient_space",
    "save_quotient_space",
    "SegmentBundle",
    "MaxPair",
    "MaxKind",
    "ProbeCertificate",
    "DistanceEnvelope",
    "SearchSettings",
    "quotient_distance",
    "relative_min_tol",
    "segment_bundle",
    "find_max_pair",
    "find_farthest_point",
    "strict_max_probe",
    "Classification",
    "ConvexityReport",
    "HalfspaceSystem",
    "midpoint_check",
    "comparison_check",
    "product_convexity_profile",
    "pointed_convexity_profile",
    "halfspace_cover_check",
]
