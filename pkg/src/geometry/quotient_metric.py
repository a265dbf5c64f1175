"""
Distances, minimizing segments and local maxima on quotient manifolds.

The quotient distance between p1 and p2 is the minimum over the lifts g . p2
near p1 of the distance in the universal cover. Around any pair only finitely
many lifts can compete for that minimum, so locally the distance is the min of
a finite family of smooth convex functions; DistanceEnvelope freezes that
family to make pattern search cheap.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from ..errors import BudgetExceededError, ConvergenceError, GeolabWarning, GeometryError
from .deck_groups import (
    DEFAULT_NODE_BUDGET,
    SEP_TOL,
    Isometry,
    IsometryKind,
    OrbitPoint,
    QuotientSpace,
    fiber_gap,
    orbit,
    reduce_to_domain,
)
from .model_spaces import (
    GeodesicSegment,
    ModelPoint,
    check_point,
    distance_broadcast,
    exp_many,
    geodesic,
    random_points,
    tangent_angle,
    tangent_frame,
    tangent_inner,
)

logger = logging.getLogger(__name__)

# Absolute tolerance, or a function of the minimal distance d
MinTol = Union[float, Callable[[float], float], None]

DIR_TOL = 1e-6
MIN_TOL_SCALE = 1e-7
NEAR_TIE_FACTOR = 10.0
ZERO_DISTANCE = 1e-12
MAX_GROWTHS = 12
RADIUS_PAD = 0.05

INITIAL_STEP_FRACTION = 0.1
STEP_FLOOR = 1e-8
STEP_SHRINK = 0.5
MAX_ITERATIONS = 20_000
EXTRA_DIRECTIONS = 32
IMPROVEMENT_TOL = 1e-14


def default_min_tol(distance: float) -> float:
    """1e-7 * (1 + d)"""
    return MIN_TOL_SCALE * (1.0 + distance)


def relative_min_tol(scale: float) -> Callable[[float], float]:
    """Tie tolerance scale * (1 + d)."""
    return lambda distance: scale * (1.0 + distance)


def _resolve_tol(min_tol: MinTol, distance: float) -> float:
    if min_tol is None:
        tol = default_min_tol(distance)
    elif callable(min_tol):
        tol = float(min_tol(distance))
    else:
        tol = float(min_tol)
    if not tol > 0.0:
        raise GeometryError(f"min_tol must be positive, got {min_tol}")
    return tol


def _closed_orbit(
    space: QuotientSpace,
    p1: ModelPoint,
    p2: ModelPoint,
    slack: Callable[[float], float],
    node_budget: int = DEFAULT_NODE_BUDGET,
    sep_tol: float = SEP_TOL,
    max_growths: int = MAX_GROWTHS,
) -> list[OrbitPoint]:
    """
    Lifts of p2 around p1, sorted by distance.

    The enumeration radius starts at twice the fundamental-domain circumradius.
    When the nearest lift plus `slack(d_min)` is not interior to the searched
    ball, the radius grows to exactly that reach plus a small pad; it doubles
    only while no lift at all has been found.
    """
    pad = RADIUS_PAD * space.circumradius
    radius = 2.0 * space.circumradius
    for _ in range(max_growths):
        lifts = orbit(space, p1, radius, lift=p2, node_budget=node_budget, sep_tol=sep_tol)
        if not lifts:
            radius *= 2.0
        else:
            reach = lifts[0].dist_to_center + slack(lifts[0].dist_to_center)
            if reach < radius:
                return lifts
            radius = reach + pad
        logger.debug("[METRIC] Growing enumeration radius to %.4f", radius)
    raise BudgetExceededError(
        "Enumeration radius never closed around the nearest lift", budget="max_growths", limit=max_growths
    )


def quotient_distance(
    space: QuotientSpace,
    p1,
    p2,
    min_tol: MinTol = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    sep_tol: float = SEP_TOL,
) -> float:
    """
    d(p1, p2) on the quotient: the minimum over enumerated lifts of p2.

    Raises:
        GeometryError: invalid points or tolerance.
        BudgetExceededError: the enumeration did not close within its budget.
    """
    p1 = check_point(space.model, p1)
    p2 = check_point(space.model, p2)
    lifts = _closed_orbit(space, p1, p2, lambda d: _resolve_tol(min_tol, d), node_budget, sep_tol)
    d_min = lifts[0].dist_to_center
    return 0.0 if d_min < ZERO_DISTANCE else d_min


@dataclass(frozen=True, eq=False)
class SegmentBundle:
    """
    Distinct minimizing segments from p1 to p2 on the quotient.

    segments[i] runs from p1 to the lift elements[i] . p2; `order` is the
    number of segments, i.e. the order of p2 as a cut point of p1.
    """
    space: QuotientSpace
    p1: ModelPoint
    p2: ModelPoint
    distance: float
    segments: tuple[GeodesicSegment, ...]
    elements: tuple[Isometry, ...]
    min_tol: float
    dir_tol: float
    near_tie: bool = False

    @property
    def order(self) -> int:
        return len(self.segments)

    def to_dict(self) -> dict:
        return {
            "p1": self.p1.tolist(),
            "p2": self.p2.tolist(),
            "distance": self.distance,
            "order": self.order,
            "lifts": [s.end.tolist() for s in self.segments],
            "words": [list(g.word) for g in self.elements],
            "segments": [
                {"length": s.length, "initial_direction": s.initial_direction.tolist()}
                for s in self.segments
            ],
            "min_tol": self.min_tol,
            "dir_tol": self.dir_tol,
            "near_tie": self.near_tie,
        }


def segment_bundle(
    space: QuotientSpace,
    p1,
    p2,
    min_tol: MinTol = None,
    dir_tol: float = DIR_TOL,
    node_budget: int = DEFAULT_NODE_BUDGET,
    sep_tol: float = SEP_TOL,
) -> SegmentBundle:
    """
    One segment per lift within min_tol of the minimum, merged by initial direction.

    Lifts in (d + min_tol, d + 10*min_tol] make the count ambiguous; the bundle
    is then flagged `near_tie` and a GeolabWarning is issued.

    Args:
        min_tol: tie tolerance, absolute or a function of d; defaults to 1e-7 * (1 + d)
        dir_tol: segments whose initial directions at p1 are closer than this
            angle count as one
        sep_tol: orbit points closer than this are one point

    Returns:
        SegmentBundle with order >= 1; a minimum below 1e-12 is a zero distance
    """
    model = space.model
    p1 = check_point(model, p1)
    p2 = check_point(model, p2)
    lifts = _closed_orbit(
        space, p1, p2, lambda d: NEAR_TIE_FACTOR * _resolve_tol(min_tol, d), node_budget, sep_tol
    )
    d_min = lifts[0].dist_to_center
    tol = _resolve_tol(min_tol, d_min)

    if d_min < ZERO_DISTANCE:
        seg = geodesic(model, p1, p1)
        return SegmentBundle(space, p1, p2, 0.0, (seg,), (lifts[0].element,), tol, dir_tol)

    segments: list[GeodesicSegment] = []
    elements: list[Isometry] = []
    for lift in lifts:
        if lift.dist_to_center > d_min + tol:
            break
        seg = geodesic(model, p1, lift.point)
        if any(tangent_angle(model, seg.initial_direction, s.initial_direction) < dir_tol for s in segments):
            continue
        segments.append(seg)
        elements.append(lift.element)

    near = [o for o in lifts if d_min + tol < o.dist_to_center <= d_min + NEAR_TIE_FACTOR * tol]
    if near:
        message = (
            f"{len(near)} lift(s) within {NEAR_TIE_FACTOR:g}*min_tol of the minimum but outside min_tol; "
            f"order {len(segments)} may be undercounted"
        )
        logger.warning("[METRIC] %s", message)
        warnings.warn(message, GeolabWarning, stacklevel=2)
    logger.debug("[METRIC] Bundle distance %.12f order %d", d_min, len(segments))
    return SegmentBundle(space, p1, p2, d_min, tuple(segments), tuple(elements), tol, dir_tol, bool(near))


def exceptional_lines(bundle: SegmentBundle) -> list[tuple[NDArray, NDArray]]:
    """
    For each segment, the direction (u1, u2) in T_p1 x T_p2 along which the
    distance to that segment's lift stays constant: u1 is the initial velocity
    and u2 the final velocity carried back to p2 by the inverse deck element.
    """
    lines = []
    for seg, g in zip(bundle.segments, bundle.elements):
        if seg.length == 0.0:
            continue
        w = seg.final_direction()
        if g.kind is IsometryKind.MATRIX:
            w = g.inverse().data @ w
        lines.append((np.array(seg.initial_direction), np.array(w)))
    return lines


def lines_in_general_position(bundle: SegmentBundle, tol: float = DIR_TOL) -> bool:
    """True when no two exceptional lines coincide (so no three share a nonzero vector)."""
    model = bundle.space.model
    lines = exceptional_lines(bundle)
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            c = 0.5 * (
                float(tangent_inner(model, lines[i][0], lines[j][0]))
                + float(tangent_inner(model, lines[i][1], lines[j][1]))
            )
            if math.acos(min(1.0, abs(c))) <= tol:
                return False
    return True


def order_map(
    space: QuotientSpace, p1, grid, min_tol: MinTol = None, sep_tol: float = SEP_TOL
) -> NDArray[np.int64]:
    """Segment-bundle order for each target point (rows of `grid`)."""
    p1 = check_point(space.model, p1)
    grid = np.asarray(grid, float)
    return np.array([segment_bundle(space, p1, q, min_tol=min_tol, sep_tol=sep_tol).order for q in grid])


# -----------------------------------------------------------------------------
# Finite min-envelope
# -----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DistanceEnvelope:
    """
    The lifts that can realise the quotient distance near an anchor pair.

    Every element g with d(a1, g . a2) <= d0 + margin is kept. While both
    points stay within margin/4 of their anchors the minimum over the kept
    elements equals the quotient distance.
    """
    space: QuotientSpace
    anchor1: ModelPoint
    anchor2: ModelPoint
    value: float
    margin: float
    elements: tuple[Isometry, ...]

    VALIDITY_FRACTION = 0.24

    @classmethod
    def around(
        cls,
        space: QuotientSpace,
        p1,
        p2,
        margin: float,
        node_budget: int = DEFAULT_NODE_BUDGET,
        sep_tol: float = SEP_TOL,
    ):
        if margin <= 0.0:
            raise GeometryError(f"Envelope margin must be positive, got {margin}")
        p1 = check_point(space.model, p1)
        p2 = check_point(space.model, p2)
        lifts = _closed_orbit(space, p1, p2, lambda d: margin, node_budget, sep_tol)
        d0 = lifts[0].dist_to_center
        elements = tuple(o.element for o in lifts if o.dist_to_center <= d0 + margin)
        logger.debug("[SEARCH] Envelope with %d lifts at value %.10f", len(elements), d0)
        return cls(space, p1, p2, d0, margin, elements)

    @property
    def validity_radius(self) -> float:
        return self.VALIDITY_FRACTION * self.margin

    def covers(self, p1, p2, reach: float = 0.0) -> bool:
        """Whether every pair within `reach` of (p1, p2) is inside the validity region."""
        model = self.space.model
        d1 = float(distance_broadcast(model, self.anchor1, p1))
        d2 = float(distance_broadcast(model, self.anchor2, p2))
        return max(d1, d2) + reach <= self.validity_radius

    def evaluate(self, p1s, p2s) -> NDArray[np.float64]:
        """min over kept lifts of d(p1, g . p2), one value per row pair."""
        model = self.space.model
        p1s = np.atleast_2d(np.asarray(p1s, dtype=float))
        p2s = np.atleast_2d(np.asarray(p2s, dtype=float))
        if self.elements[0].kind is IsometryKind.TRANSLATION:
            shifts = np.array([g.data for g in self.elements])
            images = p2s[:, None, :] + shifts[None, :, :]
        else:
            mats = np.array([g.data for g in self.elements])
            images = np.einsum("kij,bj->bki", mats, p2s)
        return np.min(distance_broadcast(model, p1s[:, None, :], images), axis=1)


# -----------------------------------------------------------------------------
# Local maxima
# -----------------------------------------------------------------------------

class MaxKind(str, Enum):
    PAIR_MAX = "pair_max"
    POINTED_MAX = "pointed_max"


@dataclass(frozen=True)
class ProbeCertificate:
    """
    Result of probing a claimed local max at a fixed radius.

    margin is min over probed directions of value - f(moved pair); positive
    certifies strictness at this resolution.
    """
    radius: float
    n_dirs: int
    margin: float
    fiber_gap: float
    radius_ok: bool

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "n_dirs": self.n_dirs,
            "margin": self.margin,
            "fiber_gap": self.fiber_gap,
            "radius_ok": self.radius_ok,
        }


@dataclass(frozen=True, eq=False)
class MaxPair:
    p1: ModelPoint
    p2: ModelPoint
    value: float
    kind: MaxKind
    certificate: Optional[ProbeCertificate] = None
    iterations: int = 0
    final_step: float = 0.0
    seed_index: int = 0

    def to_dict(self) -> dict:
        return {
            "p1": self.p1.tolist(),
            "p2": self.p2.tolist(),
            "value": self.value,
            "kind": self.kind.value,
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "iterations": self.iterations,
            "final_step": self.final_step,
            "seed_index": self.seed_index,
        }


@dataclass(frozen=True)
class SearchSettings:
    """Pattern-search schedule; initial_step defaults to 0.1 * circumradius."""
    initial_step: Optional[float] = None
    step_floor: float = STEP_FLOOR
    shrink: float = STEP_SHRINK
    max_iterations: int = MAX_ITERATIONS
    extra_directions: int = EXTRA_DIRECTIONS
    node_budget: int = DEFAULT_NODE_BUDGET
    sep_tol: float = SEP_TOL

    def __post_init__(self):
        if not 0.0 < self.shrink < 1.0:
            raise GeometryError(f"shrink must lie in (0, 1), got {self.shrink}")
        if self.step_floor <= 0.0 or self.max_iterations < 1:
            raise GeometryError("step_floor must be positive and max_iterations >= 1")
        if self.sep_tol <= 0.0:
            raise GeometryError(f"sep_tol must be positive, got {self.sep_tol}")


def _poll_directions(rng: np.random.Generator, m: int, extra: int) -> NDArray[np.float64]:
    """Rows: +/- a fresh random orthonormal basis, +/- the coordinate axes, then `extra` random unit vectors."""
    q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    eye = np.eye(m)
    rows = [q.T, -q.T, eye, -eye]
    if extra > 0:
        r = rng.standard_normal((extra, m))
        rows.append(r / np.linalg.norm(r, axis=1, keepdims=True))
    return np.vstack(rows)


def _move(space: QuotientSpace, p: ModelPoint, coeffs: NDArray) -> NDArray[np.float64]:
    """exp_p of each row of coeffs, read in an orthonormal frame of T_p."""
    return exp_many(space.model, p, coeffs @ tangent_frame(space.model, p))


def _pattern_search(
    space: QuotientSpace,
    p1: ModelPoint,
    p2: ModelPoint,
    kind: MaxKind,
    rng: np.random.Generator,
    settings: SearchSettings,
    seed_index: int,
) -> MaxPair:
    """
    Derivative-free ascent of the quotient distance from one seed.

    Polls a fresh set of directions at every iteration; a poll that improves
    moves there and doubles the step (capped at the initial step), a failed
    poll halves it. Stops once the step drops below step_floor.
    """
    model = space.model
    n = model.dimension
    free_p1 = kind is MaxKind.PAIR_MAX
    m = 2 * n if free_p1 else n
    step0 = settings.initial_step or INITIAL_STEP_FRACTION * space.circumradius
    step = step0
    margin = max(space.circumradius, 8.0 * step0)
    env = DistanceEnvelope.around(space, p1, p2, margin, settings.node_budget, settings.sep_tol)
    f = env.value
    iterations = 0

    while step >= settings.step_floor:
        if iterations >= settings.max_iterations:
            best = MaxPair(p1, p2, f, kind, iterations=iterations, final_step=step, seed_index=seed_index)
            raise ConvergenceError(
                f"Pattern search from seed {seed_index} still at step {step:.3e} after {iterations} iterations",
                best=best,
            )
        iterations += 1
        if not env.covers(p1, p2, reach=step):
            if free_p1:
                p1, _ = reduce_to_domain(space, p1)
            p2, _ = reduce_to_domain(space, p2)
            env = DistanceEnvelope.around(space, p1, p2, margin, settings.node_budget, settings.sep_tol)
            f = env.value
        dirs = _poll_directions(rng, m, settings.extra_directions)
        trial2 = _move(space, p2, step * dirs[:, m - n:])
        trial1 = _move(space, p1, step * dirs[:, :n]) if free_p1 else np.broadcast_to(p1, trial2.shape)
        values = env.evaluate(trial1, trial2)
        best = int(np.argmax(values))
        if values[best] > f + IMPROVEMENT_TOL * (1.0 + abs(f)):
            p1 = check_point(model, trial1[best])
            p2 = check_point(model, trial2[best])
            f = float(values[best])
            step = min(2.0 * step, step0)
        else:
            step *= settings.shrink

    value = quotient_distance(space, p1, p2, node_budget=settings.node_budget, sep_tol=settings.sep_tol)
    logger.debug("[SEARCH] Seed %d stagnated at %.12f after %d iterations", seed_index, value, iterations)
    return MaxPair(p1, p2, value, kind, iterations=iterations, final_step=step, seed_index=seed_index)


def _multi_start(
    space: QuotientSpace,
    pairs: Sequence[tuple[ModelPoint, ModelPoint]],
    kind: MaxKind,
    settings: SearchSettings,
    seed: int,
    max_workers: Optional[int],
) -> MaxPair:
    if not pairs:
        raise GeometryError("At least one seed is required")
    streams = np.random.SeedSequence(seed).spawn(len(pairs))

    def run(i: int):
        rng = np.random.default_rng(streams[i])
        try:
            return _pattern_search(space, pairs[i][0], pairs[i][1], kind, rng, settings, i), None
        except ConvergenceError as exc:
            return exc.best, exc

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(run, range(len(pairs))))

    converged = [r for r, err in results if err is None]
    if not converged:
        best = max((r for r, _ in results), key=lambda r: (r.value, -r.seed_index))
        raise ConvergenceError(f"None of {len(pairs)} seeds converged", best=best)
    best = max(converged, key=lambda r: (r.value, -r.seed_index))
    logger.info(
        "[SEARCH] %s: best value %.12f from seed %d (%d/%d seeds converged)",
        kind.value, best.value, best.seed_index, len(converged), len(pairs),
    )
    return best


def find_max_pair(
    space: QuotientSpace,
    seeds: Sequence[tuple],
    settings: Optional[SearchSettings] = None,
    seed: int = 0,
    max_workers: Optional[int] = None,
) -> MaxPair:
    """
    Local maximum of the distance function on M x M by multi-start pattern search.

    Args:
        seeds: (p1, p2) starting pairs
        settings: step schedule and budgets
        seed: root of the per-seed direction streams
        max_workers: thread cap for running seeds in parallel

    Returns:
        The best stagnated pair, ties broken by seed index

    Raises:
        ConvergenceError: no seed stagnated within max_iterations; `best` holds
            the best iterate seen.
    """
    model = space.model
    pairs = [(check_point(model, a), check_point(model, b)) for a, b in seeds]
    return _multi_start(space, pairs, MaxKind.PAIR_MAX, settings or SearchSettings(), seed, max_workers)


def find_farthest_point(
    space: QuotientSpace,
    p1,
    seeds: Sequence,
    settings: Optional[SearchSettings] = None,
    seed: int = 0,
    max_workers: Optional[int] = None,
) -> MaxPair:
    """Local maximum of q -> d(p1, q) with p1 held fixed; see find_max_pair."""
    model = space.model
    p1 = check_point(model, p1)
    pairs = [(p1, check_point(model, q)) for q in seeds]
    return _multi_start(space, pairs, MaxKind.POINTED_MAX, settings or SearchSettings(), seed, max_workers)


def strict_max_probe(
    space: QuotientSpace,
    pair: MaxPair,
    radius: float,
    n_dirs: int = 64,
    seed: int = 0,
    directions: Optional[NDArray] = None,
    min_tol: MinTol = None,
    sep_tol: float = SEP_TOL,
) -> ProbeCertificate:
    """
    Minimum decrease of the quotient distance over sampled directions at `radius`.

    Directions live on the unit sphere of T_p1 x T_p2 (of T_p2 alone for a
    pointed max); explicit `directions` rows replace the random sample. A
    radius not below fiber_gap/4 is reported through `radius_ok` and a warning.
    """
    if radius < 0.0:
        raise GeometryError(f"Probe radius must be nonnegative, got {radius}")
    model = space.model
    n = model.dimension
    free_p1 = pair.kind is MaxKind.PAIR_MAX
    m = 2 * n if free_p1 else n

    # The gap needs the first lift past the tie set; widen only until one is enumerated
    reach = 4.0 * radius
    for _ in range(MAX_GROWTHS):
        lifts = _closed_orbit(
            space, pair.p1, pair.p2, lambda d: reach + _resolve_tol(min_tol, d), sep_tol=sep_tol
        )
        tol = _resolve_tol(min_tol, lifts[0].dist_to_center)
        k = sum(1 for o in lifts if o.dist_to_center <= lifts[0].dist_to_center + tol)
        if len(lifts) > k:
            break
        reach = max(2.0 * reach, space.injectivity_floor)
    gap = fiber_gap(lifts, k)
    radius_ok = radius < gap / 4.0
    if not radius_ok:
        message = f"Probe radius {radius:g} is not below fiber_gap/4 = {gap / 4.0:g}"
        logger.warning("[PROBE] %s", message)
        warnings.warn(message, GeolabWarning, stacklevel=2)

    if directions is None:
        dirs = np.random.default_rng(seed).standard_normal((n_dirs, m))
    else:
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        if dirs.shape[1] != m:
            raise GeometryError(f"Probe directions need {m} components, got {dirs.shape[1]}")
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    if radius == 0.0:
        return ProbeCertificate(0.0, len(dirs), 0.0, gap, radius_ok)

    env = DistanceEnvelope.around(space, pair.p1, pair.p2, 8.0 * radius, sep_tol=sep_tol)
    trial2 = _move(space, pair.p2, radius * dirs[:, m - n:])
    trial1 = _move(space, pair.p1, radius * dirs[:, :n]) if free_p1 else np.broadcast_to(pair.p1, trial2.shape)
    margin = float(np.min(pair.value - env.evaluate(trial1, trial2)))
    logger.info("[PROBE] radius %.1e, %d directions, margin %.3e", radius, len(dirs), margin)
    return ProbeCertificate(float(radius), len(dirs), margin, gap, radius_ok)


def default_seeds(space: QuotientSpace, count: int, seed: int = 0) -> list[tuple[ModelPoint, ModelPoint]]:
    """Deterministic (p1, p2) starting pairs inside the fundamental domain."""
    if count < 1:
        raise GeometryError(f"Seed count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    model = space.model
    if not model.is_hyperbolic:
        coeffs = rng.random((count, 2, model.dimension))
        pts = coeffs @ space.basis + space.base_lift
    else:
        pts = random_points(model, rng, 2 * count, max_radius=0.9 * space.circumradius).reshape(count, 2, -1)
    out = []
    for a, b in pts:
        out.append((reduce_to_domain(space, a)[0], reduce_to_domain(space, b)[0]))
    return out
