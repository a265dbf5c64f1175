"""
Experiment nodes; each one runs a family of checks and files an ExperimentReport.
"""

from .convexity import create_convexity_node, run_convexity
from .halfspace import create_halfspace_node, run_halfspace
from .hyperbolic import create_hyperbolic_node, run_hyperbolic
from .torus import create_torus_node, run_torus

RUNNERS = {
    "torus": run_torus,
    "hyperbolic": run_hyperbolic,
    "convexity": run_convexity,
    "halfspace": run_halfspace,
}

__all__ = [
    "RUNNERS",
    "create_convexity_node",
    "create_halfspace_node",
    "create_hyperbolic_node",
    "create_torus_node",
    "run_convexity",
    "run_halfspace",
    "run_hyperbolic",
    "run_torus",
]
