"""
Numerical checks of the convexity facts behind the segment-count bounds.

Covers the strict midpoint inequality in H^n, the comparison inequality for
triangles, convexity of distance along product and pointed geodesics (with
the single exceptional line where it is constant), and the half-space cover
dimension bound. Random sweeps split a SeedSequence into chunks and merge the
chunk counts in chunk order.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from ..errors import GeolabWarning, GeometryError
from .model_spaces import (
    GeodesicSegment,
    ModelSpace,
    check_point,
    collinearity_residual,
    collinearity_residual_many,
    comparison_point,
    comparison_triangle,
    distance,
    distance_broadcast,
    distance_many,
    interpolate,
    interpolate_many,
    log_map,
    random_point,
    random_points,
    tangent_inner,
    tangent_norm,
)

logger = logging.getLogger(__name__)

H_STEP = 1e-3
TOL_CONV = 1e-9
STRICT_TOL = 1e-12
COLLINEAR_TOL = 1e-8
COMPARISON_TOL = 1e-9
RANK_TOL = 1e-10
INTERIOR_TS = tuple(round(0.1 * i, 1) for i in range(1, 10))


class Classification(str, Enum):
    STRICTLY_CONVEX = "strictly_convex"
    CONVEX_CONSTANT_ON_LINE = "convex_constant_on_line"
    VIOLATION = "violation"


def classify_margin(min_margin: float, tol: float = TOL_CONV) -> Classification:
    if min_margin < -tol:
        return Classification.VIOLATION
    if min_margin > tol:
        return Classification.STRICTLY_CONVEX
    return Classification.CONVEX_CONSTANT_ON_LINE


@dataclass(frozen=True)
class ConvexityReport:
    """
    Second differences f(t-h) - 2f(t) + f(t+h) of a distance profile.

    Attributes:
        samples: (t, second difference) pairs
        min_margin: smallest second difference
        exceptional_direction_detected: the profile runs along the exceptional
            line (collinear configuration with a non-strict profile)
        classification: violation iff min_margin < -tol_conv
        value_range: max - min of the profile values
        exceptional_direction: the (u1, u2) pair spanning the exceptional line, if any
    """
    samples: tuple[tuple[float, float], ...]
    min_margin: float
    exceptional_direction_detected: bool
    classification: Classification
    tol_conv: float = TOL_CONV
    value_range: float = 0.0
    exceptional_direction: Optional[tuple[tuple[float, ...], tuple[float, ...]]] = None

    def to_dict(self) -> dict:
        return {
            "min_margin": self.min_margin,
            "classification": self.classification.value,
            "exceptional_direction_detected": self.exceptional_direction_detected,
            "exceptional_direction": self.exceptional_direction,
            "value_range": self.value_range,
            "tol_conv": self.tol_conv,
            "n_samples": len(self.samples),
        }

    def rows(self) -> list[dict]:
        return [{"t": t, "second_difference": sd} for t, sd in self.samples]


def _second_differences(f: Callable[[NDArray], NDArray], n_samples: int, h: float):
    if n_samples < 1:
        raise GeometryError(f"n_samples must be >= 1, got {n_samples}")
    if not 0.0 < h < 0.5:
        raise GeometryError(f"Step h must lie in (0, 0.5), got {h}")
    ts = np.linspace(h, 1.0 - h, n_samples)
    lo, mid, hi = f(np.clip(ts - h, 0.0, 1.0)), f(ts), f(np.clip(ts + h, 0.0, 1.0))
    values = np.concatenate([lo, mid, hi])
    return ts, lo - 2.0 * mid + hi, float(np.max(values) - np.min(values))


def _report(ts, sd, value_range, tol, detected, direction=None) -> ConvexityReport:
    min_margin = float(np.min(sd))
    classification = classify_margin(min_margin, tol)
    if classification is Classification.VIOLATION:
        logger.warning("[CONVEX] Convexity violated: min second difference %.3e", min_margin)
    return ConvexityReport(
        samples=tuple(zip(ts.tolist(), sd.tolist())),
        min_margin=min_margin,
        exceptional_direction_detected=bool(detected and classification is not Classification.STRICTLY_CONVEX),
        classification=classification,
        tol_conv=tol,
        value_range=value_range,
        exceptional_direction=direction,
    )


class MidpointResult(NamedTuple):
    lhs: float
    rhs: float
    strict: bool


def midpoint_check(space: ModelSpace, p1, q1, p2, q2) -> MidpointResult:
    """
    d(mid(p1, q1), mid(p2, q2)) against (d(p1, p2) + d(q1, q2)) / 2.

    strict is rhs - lhs > 1e-12; in H^n this holds exactly when the four
    points do not lie on one maximal geodesic.
    """
    m1 = interpolate(space, p1, q1, 0.5)
    m2 = interpolate(space, p2, q2, 0.5)
    lhs = distance(space, m1, m2)
    rhs = 0.5 * (distance(space, p1, p2) + distance(space, q1, q2))
    return MidpointResult(lhs, rhs, rhs - lhs > STRICT_TOL)


def interior_convexity_check(space: ModelSpace, p1, q1, p2, q2, ts: Sequence[float] = INTERIOR_TS) -> float:
    """
    Worst slack of d(tp1+(1-t)q1, tp2+(1-t)q2) <= t d(p1,p2) + (1-t) d(q1,q2) over ts.

    Here tp+(1-t)q is the point dividing [p, q] so that its distance from p is
    (1-t) d(p, q). Negative slack is a violation.
    """
    d_p = distance(space, p1, p2)
    d_q = distance(space, q1, q2)
    worst = math.inf
    for t in ts:
        a = interpolate(space, p1, q1, 1.0 - t)
        b = interpolate(space, p2, q2, 1.0 - t)
        worst = min(worst, t * d_p + (1.0 - t) * d_q - distance(space, a, b))
    return worst


class ComparisonResult(NamedTuple):
    d_qr: float
    d_star: float


def comparison_check(
    space: ModelSpace,
    p1,
    p2,
    p3,
    s: float,
    u: float,
    comparison_curvature: Optional[float] = None,
) -> ComparisonResult:
    """
    Distance between q on [p1, p2] and r on [p1, p3] against its comparison value.

    q and r sit at fractions s and u of their sides. The comparison triangle
    lives in the model of `comparison_curvature` (default: the space's own
    curvature, where the two values agree). Degenerate triangles are embedded
    on one geodesic.
    """
    chi = space.curvature if comparison_curvature is None else comparison_curvature
    d12 = distance(space, p1, p2)
    d13 = distance(space, p1, p3)
    d23 = distance(space, p2, p3)
    q = interpolate(space, p1, p2, s)
    r = interpolate(space, p1, p3, u)
    tri = comparison_triangle(d12, d13, d23, chi)
    q_star = comparison_point(tri, 0, s * d12)
    r_star = comparison_point(tri, 1, u * d13)
    return ComparisonResult(distance(space, q, r), distance(tri.space, q_star, r_star))


def _exceptional_direction(space: ModelSpace, p1, p2) -> Optional[tuple[tuple[float, ...], tuple[float, ...]]]:
    d = distance(space, p1, p2)
    if d == 0.0:
        return None
    u1 = log_map(space, p1, p2) / d
    u2 = -log_map(space, p2, p1) / d
    return tuple(u1.tolist()), tuple(u2.tolist())


def product_convexity_profile(
    g1: GeodesicSegment,
    g2: GeodesicSegment,
    n_samples: int = 101,
    h: float = H_STEP,
    tol: float = TOL_CONV,
) -> ConvexityReport:
    """
    Profile of t -> d(g1(t), g2(t)) along the product geodesic.

    Strictly convex unless the four endpoints lie on one geodesic; in that case
    the profile is affine and, when both segments move the same way along that
    geodesic, constant along the exceptional direction.
    """
    space = g1.space
    if g2.space != space:
        raise GeometryError("Both segments must live in the same model space")
    ends = [g1.start, g1.end, g2.start, g2.end]
    separation = float(np.min(distance_broadcast(space, np.array(ends[:2])[:, None], np.array(ends[2:])[None])))
    if separation == 0.0:
        message = "Segments share an endpoint; profile taken without the separation hypothesis"
        logger.warning("[CONVEX] %s", message)
        warnings.warn(message, GeolabWarning, stacklevel=2)

    def f(ts):
        return distance_broadcast(space, g1.points_at(ts), g2.points_at(ts))

    ts, sd, value_range = _second_differences(f, n_samples, h)
    collinear = collinearity_residual(space, ends) <= COLLINEAR_TOL
    direction = _exceptional_direction(space, g1.start, g2.start) if collinear else None
    return _report(ts, sd, value_range, tol, collinear, direction)


def pointed_convexity_profile(
    space: ModelSpace,
    p,
    g: GeodesicSegment,
    n_samples: int = 101,
    h: float = H_STEP,
    tol: float = TOL_CONV,
) -> ConvexityReport:
    """
    Profile of t -> d(p, g(t)).

    Convex and, for a nontrivial g, never constant; strictly convex unless g
    points along the radial geodesic through p.
    """
    p = check_point(space, p)

    def f(ts):
        return distance_many(space, p, g.points_at(ts))

    ts, sd, value_range = _second_differences(f, n_samples, h)
    radial = g.length > 0.0 and collinearity_residual(space, [p, g.start, g.end]) <= COLLINEAR_TOL
    direction = None
    if radial:
        direction = (tuple(g.initial_direction.tolist()), tuple(np.zeros_like(p).tolist()))
    return _report(ts, sd, value_range, tol, radial, direction)


def classify_product_direction(space: ModelSpace, p1, p2, v1, v2, tol: float = 1e-9) -> str:
    """
    Behaviour of d along the product geodesic from (p1, p2) with velocity (v1, v2).

    Returns "constant" on the exceptional line (both points slide along the
    geodesic through p1 and p2 at equal speed), "affine" elsewhere in the plane
    spanned by those two sliding motions, and "strict" otherwise.

    Raises:
        GeometryError: p1 == p2 or a zero velocity.
    """
    p1 = check_point(space, p1)
    p2 = check_point(space, p2)
    direction = _exceptional_direction(space, p1, p2)
    if direction is None:
        raise GeometryError("The exceptional line is undefined when p1 == p2")
    u1, u2 = (np.array(x) for x in direction)
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    scale = math.hypot(tangent_norm(space, v1), tangent_norm(space, v2))
    if scale == 0.0:
        raise GeometryError("Direction (v1, v2) must be nonzero")
    a = float(tangent_inner(space, v1, u1))
    b = float(tangent_inner(space, v2, u2))
    off_line = math.hypot(tangent_norm(space, v1 - a * u1), tangent_norm(space, v2 - b * u2))
    if off_line > tol * scale:
        return "strict"
    if abs(a - b) <= tol * scale:
        return "constant"
    return "affine"


# -----------------------------------------------------------------------------
# Half-space covers
# -----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HalfspaceSystem:
    """
    k closed half-spaces {x : sides[i] * <normals[i], x> >= 0} of R^n.

    Systems with k > n are accepted; the dimension bound is then vacuous.
    """
    dimension: int
    normals: NDArray[np.float64]
    sides: NDArray[np.int64]

    def __post_init__(self):
        normals = np.array(self.normals, dtype=float)
        sides = np.array(self.sides, dtype=int)
        if self.dimension < 2:
            raise GeometryError(f"Half-space systems need n >= 2, got {self.dimension}")
        if normals.ndim != 2 or normals.shape[1] != self.dimension or normals.shape[0] < 1:
            raise GeometryError(f"Normals must have shape (k, {self.dimension}) with k >= 1, got {normals.shape}")
        if sides.shape != (normals.shape[0],) or not np.all(np.abs(sides) == 1):
            raise GeometryError("Need one side in {-1, +1} per normal")
        if np.max(np.abs(np.linalg.norm(normals, axis=1) - 1.0)) > 1e-9:
            raise GeometryError("Normals must be unit vectors")
        normals.setflags(write=False)
        sides.setflags(write=False)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "sides", sides)

    @classmethod
    def from_normals(cls, normals, sides=None) -> "HalfspaceSystem":
        """Normalize the given normals; sides default to +1."""
        normals = np.atleast_2d(np.asarray(normals, dtype=float))
        lengths = np.linalg.norm(normals, axis=1, keepdims=True)
        if np.any(lengths == 0.0):
            raise GeometryError("Normals must be nonzero")
        sides = np.ones(len(normals), dtype=int) if sides is None else sides
        return cls(normals.shape[1], normals / lengths, sides)

    @property
    def k(self) -> int:
        return self.normals.shape[0]

    @property
    def bound(self) -> int:
        """n - k + 1"""
        return self.dimension - self.k + 1

    @property
    def vacuous(self) -> bool:
        return self.k > self.dimension

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "normals": self.normals.tolist(), "sides": self.sides.tolist()}


@dataclass(frozen=True)
class HalfspaceResult:
    covers: bool
    dim_intersection: int
    bound: int
    witness: Optional[tuple[float, ...]] = None

    @property
    def consistent(self) -> bool:
        """covers implies dim_intersection >= n - k + 1"""
        return not self.covers or self.dim_intersection >= self.bound

    def to_dict(self) -> dict:
        return {
            "covers": self.covers,
            "dim_intersection": self.dim_intersection,
            "bound": self.bound,
            "consistent": self.consistent,
            "witness": list(self.witness) if self.witness is not None else None,
        }


def halfspace_cover_check(
    system: HalfspaceSystem,
    n_samples: int = 1_000_000,
    seed: int = 0,
    chunk_size: int = 100_000,
) -> HalfspaceResult:
    """
    Decide whether the half-spaces cover R^n by searching for an uncovered direction.

    A point is uncovered when sides[i] * <normals[i], x> < 0 for every i. The
    least-squares solution of sides[i] * <normals[i], x> = -1 is tried first,
    then n_samples uniform points of the unit sphere. No witness means covers.
    The intersection dimension is n minus the numerical rank (threshold 1e-10)
    of the stacked normals.
    """
    if n_samples < 1:
        raise GeometryError(f"n_samples must be >= 1, got {n_samples}")
    n = system.dimension
    signed = system.sides[:, None] * system.normals
    dim = n - int(np.linalg.matrix_rank(system.normals, tol=RANK_TOL))

    witness = None
    guess = np.linalg.lstsq(signed, -np.ones(system.k), rcond=None)[0]
    if np.all(signed @ guess < 0.0):
        witness = guess / np.linalg.norm(guess)
    rng = np.random.default_rng(seed)
    remaining = n_samples
    while witness is None and remaining > 0:
        size = min(chunk_size, remaining)
        remaining -= size
        x = rng.standard_normal((size, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        uncovered = np.all(x @ signed.T < 0.0, axis=1)
        if np.any(uncovered):
            witness = x[int(np.argmax(uncovered))]

    result = HalfspaceResult(
        covers=witness is None,
        dim_intersection=dim,
        bound=system.bound,
        witness=None if witness is None else tuple(witness.tolist()),
    )
    if not result.consistent:
        message = (
            f"No uncovered direction found in {n_samples} samples although the intersection has "
            f"dimension {dim} < {system.bound}"
        )
        logger.warning("[HALFSPACE] %s", message)
        warnings.warn(message, GeolabWarning, stacklevel=2)
    return result


# -----------------------------------------------------------------------------
# Sweeps
# -----------------------------------------------------------------------------

def _chunk_sizes(total: int, chunk_size: int) -> list[int]:
    if total < 1:
        raise GeometryError(f"Sweep size must be >= 1, got {total}")
    full, rest = divmod(total, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def _run_chunks(total: int, chunk_size: int, seed: int, work, max_workers: Optional[int]) -> list:
    """Run work(size, rng) on each chunk in parallel; results in chunk order."""
    sizes = _chunk_sizes(total, chunk_size)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda i: work(sizes[i], np.random.default_rng(streams[i])), range(len(sizes))))


@dataclass(frozen=True)
class MidpointSweepResult:
    trials: int
    collinear_skipped: int
    violations: int
    min_gap: float
    interior_violations: int
    worst_interior_slack: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def midpoint_sweep(
    space: ModelSpace,
    trials: int,
    seed: int = 0,
    max_radius: float = 2.0,
    chunk_size: int = 10_000,
    max_workers: Optional[int] = None,
) -> MidpointSweepResult:
    """
    Random quadruples: strict midpoint inequality off the collinear band, and the
    interior-t inequality for every quadruple.
    """
    def work(size: int, rng: np.random.Generator):
        p1, q1, p2, q2 = (random_points(space, rng, size, max_radius) for _ in range(4))
        lhs = distance_broadcast(space, interpolate_many(space, p1, q1, 0.5), interpolate_many(space, p2, q2, 0.5))
        d_p = distance_broadcast(space, p1, p2)
        d_q = distance_broadcast(space, q1, q2)
        gap = 0.5 * (d_p + d_q) - lhs
        noncollinear = collinearity_residual_many(space, np.stack([p1, q1, p2, q2], axis=1)) > COLLINEAR_TOL
        slack = np.full(size, np.inf)
        for t in INTERIOR_TS:
            a = interpolate_many(space, p1, q1, 1.0 - t)
            b = interpolate_many(space, p2, q2, 1.0 - t)
            slack = np.minimum(slack, t * d_p + (1.0 - t) * d_q - distance_broadcast(space, a, b))
        return (
            int(np.sum(~noncollinear)),
            int(np.sum(noncollinear & (gap <= STRICT_TOL))),
            float(np.min(gap[noncollinear])) if np.any(noncollinear) else math.inf,
            int(np.sum(slack < -TOL_CONV)),
            float(np.min(slack)),
        )

    parts = _run_chunks(trials, chunk_size, seed, work, max_workers)
    result = MidpointSweepResult(
        trials=trials,
        collinear_skipped=sum(p[0] for p in parts),
        violations=sum(p[1] for p in parts),
        min_gap=min(p[2] for p in parts),
        interior_violations=sum(p[3] for p in parts),
        worst_interior_slack=min(p[4] for p in parts),
    )
    logger.info("[CONVEX] Midpoint sweep: %d trials, %d violations", trials, result.violations)
    return result


@dataclass(frozen=True)
class ComparisonSweepResult:
    trials: int
    comparison_curvature: float
    violations: int
    max_excess: float
    max_abs_error: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def comparison_sweep(
    space: ModelSpace,
    trials: int,
    comparison_curvature: float,
    seed: int = 0,
    max_radius: float = 2.0,
    chunk_size: int = 1_000,
    max_workers: Optional[int] = None,
) -> ComparisonSweepResult:
    """Random triangles: d(q, r) - d*(q*, r*) should stay <= 1e-9."""
    def work(size: int, rng: np.random.Generator):
        violations, worst, abs_error = 0, -math.inf, 0.0
        for _ in range(size):
            p1, p2, p3 = (random_point(space, rng, max_radius) for _ in range(3))
            s, u = rng.random(2)
            res = comparison_check(space, p1, p2, p3, float(s), float(u), comparison_curvature)
            excess = res.d_qr - res.d_star
            violations += excess > COMPARISON_TOL
            worst = max(worst, excess)
            abs_error = max(abs_error, abs(excess))
        return violations, worst, abs_error

    parts = _run_chunks(trials, chunk_size, seed, work, max_workers)
    result = ComparisonSweepResult(
        trials=trials,
        comparison_curvature=comparison_curvature,
        violations=sum(p[0] for p in parts),
        max_excess=max(p[1] for p in parts),
        max_abs_error=max(p[2] for p in parts),
    )
    logger.info(
        "[CONVEX] Comparison sweep (chi' = %g): %d trials, %d violations",
        comparison_curvature, trials, result.violations,
    )
    return result


def random_halfspace_system(rng: np.random.Generator, max_dim: int = 5) -> HalfspaceSystem:
    """
    A random system with n <= max_dim, k <= n and distinct hyperplanes.

    Half of the systems with k >= 3 are built to cover: the last signed normal
    is a negative combination of the others.
    """
    n = int(rng.integers(2, max_dim + 1))
    k = int(rng.integers(1, n + 1))
    sides = rng.choice([-1, 1], size=k)
    normals = rng.standard_normal((k, n))
    if k >= 3 and rng.random() < 0.5:
        weights = rng.random(k - 1) + 0.1
        combo = -(weights[:, None] * sides[:k - 1, None] * normals[:k - 1]).sum(axis=0)
        normals[k - 1] = sides[k - 1] * combo
    return HalfspaceSystem.from_normals(normals, sides)


@dataclass(frozen=True)
class HalfspaceSweepResult:
    systems: int
    covering: int
    counterexamples: int
    vacuous: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def halfspace_sweep(
    systems: int,
    n_samples: int = 10_000,
    seed: int = 0,
    max_dim: int = 5,
    chunk_size: int = 100,
    max_workers: Optional[int] = None,
) -> HalfspaceSweepResult:
    """Count systems where the cover test passes but the intersection is too small."""
    def work(size: int, rng: np.random.Generator):
        covering = counterexamples = vacuous = 0
        for _ in range(size):
            system = random_halfspace_system(rng, max_dim)
            res = halfspace_cover_check(system, n_samples, seed=int(rng.integers(2**32)))
            covering += res.covers
            counterexamples += not res.consistent
            vacuous += system.vacuous
        return covering, counterexamples, vacuous

    parts = _run_chunks(systems, chunk_size, seed, work, max_workers)
    result = HalfspaceSweepResult(
        systems=systems,
        covering=sum(p[0] for p in parts),
        counterexamples=sum(p[1] for p in parts),
        vacuous=sum(p[2] for p in parts),
    )
    logger.info(
        "[HALFSPACE] Sweep: %d systems, %d covering, %d counterexamples",
        systems, result.covering, result.counterexamples,
    )
    return result
