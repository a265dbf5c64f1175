"""
Closed-form geometry of the simply connected constant-curvature models.

Two models are supported: Euclidean space R^n (curvature 0) and the
hyperbolic space H_chi of constant curvature chi < 0, realised as the upper
sheet of the hyperboloid <x, x>_M = 1/chi in Minkowski space R^(n,1).
Every operation here is a pure function of immutable inputs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray

from ..errors import GeometryError

logger = logging.getLogger(__name__)

ModelPoint = NDArray[np.float64]
TangentVector = NDArray[np.float64]

# Relative tolerance for accepting caller-supplied points and tangent vectors.
NORMALIZATION_TOL = 1e-8
TANGENT_TOL = 1e-8
# Triangle inequality slack for comparison triangles.
TRIANGLE_TOL = 1e-12
# Below this argument acosh(1 + u) switches to its series expansion.
ACOSH_SERIES_CUTOFF = 1e-8


class SpaceKind(str, Enum):
    """The two families of model spaces."""
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class ModelSpace:
    """
    A simply connected model space of constant curvature chi <= 0.

    Attributes:
        kind: euclidean or hyperbolic
        dimension: intrinsic dimension n >= 2
        curvature: chi; exactly 0 for euclidean, strictly negative for hyperbolic
    """
    kind: SpaceKind
    dimension: int
    curvature: float = 0.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", SpaceKind(self.kind))
        except ValueError:
            raise GeometryError(f"Unknown model space kind: {self.kind!r}")
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise GeometryError(f"Model space dimension must be an integer >= 2, got {self.dimension}")
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "curvature", float(self.curvature))
        if not math.isfinite(self.curvature):
            raise GeometryError("Curvature must be finite")
        if self.kind is SpaceKind.EUCLIDEAN and self.curvature != 0.0:
            raise GeometryError(f"Euclidean space has curvature 0, got {self.curvature}")
        if self.kind is SpaceKind.HYPERBOLIC and self.curvature >= 0.0:
            raise GeometryError(f"Hyperbolic space requires curvature < 0, got {self.curvature}")

    @classmethod
    def euclidean(cls, dimension: int = 2) -> "ModelSpace":
        return cls(SpaceKind.EUCLIDEAN, dimension, 0.0)

    @classmethod
    def hyperbolic(cls, dimension: int = 2, curvature: float = -1.0) -> "ModelSpace":
        return cls(SpaceKind.HYPERBOLIC, dimension, curvature)

    @property
    def is_hyperbolic(self) -> bool:
        return self.kind is SpaceKind.HYPERBOLIC

    @property
    def radius(self) -> float:
        """Curvature radius R = 1/sqrt(-chi); infinite for euclidean space."""
        if not self.is_hyperbolic:
            return math.inf
        return 1.0 / math.sqrt(-self.curvature)

    @property
    def ambient_dimension(self) -> int:
        """Length of a coordinate vector: n, or n+1 on the hyperboloid."""
        return self.dimension + 1 if self.is_hyperbolic else self.dimension

    def origin(self) -> ModelPoint:
        """The reference point: 0 in R^n, (R, 0, ..., 0) on the hyperboloid."""
        o = np.zeros(self.ambient_dimension)
        if self.is_hyperbolic:
            o[0] = self.radius
        return _frozen(o)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "dimension": self.dimension, "curvature": self.curvature}


# -----------------------------------------------------------------------------
# Minkowski form
# -----------------------------------------------------------------------------

def minkowski_form(size: int) -> NDArray[np.float64]:
    """J = diag(-1, 1, ..., 1) of the given size."""
    j = np.eye(size)
    j[0, 0] = -1.0
    return j


def minkowski_inner(x: NDArray, y: NDArray) -> NDArray | float:
    """<x, y>_M = -x0*y0 + x1*y1 + ...; broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def _frozen(a: NDArray) -> NDArray:
    a.setflags(write=False)
    return a


def acosh1p(u: NDArray | float) -> NDArray | float:
    """acosh(1 + u) for u >= 0, stable for tiny u."""
    u = np.maximum(np.asarray(u, dtype=float), 0.0)
    small = u < ACOSH_SERIES_CUTOFF
    series = np.sqrt(2.0 * u) * (1.0 - u / 12.0 + 3.0 * u * u / 160.0)
    regular = np.log1p(u + np.sqrt(u * (u + 2.0)))
    out = np.where(small, series, regular)
    return float(out) if out.ndim == 0 else out


# -----------------------------------------------------------------------------
# Points
# -----------------------------------------------------------------------------

def project(space: ModelSpace, x: NDArray) -> ModelPoint:
    """Re-project coordinates onto the model (hyperboloid upper sheet)."""
    x = np.array(x, dtype=float)
    if space.is_hyperbolic:
        x[..., 0] = np.sqrt(space.radius ** 2 + np.sum(x[..., 1:] ** 2, axis=-1))
    return x


def check_point(space: ModelSpace, p: NDArray) -> ModelPoint:
    """
    Validate a point of `space` and return a re-projected, read-only copy.

    Raises:
        GeometryError: wrong length, non-finite entries, or (hyperbolic) a
            point off the hyperboloid's upper sheet.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (space.ambient_dimension,):
        raise GeometryError(
            f"Expected a point with {space.ambient_dimension} coordinates for {space.kind.value} "
            f"space of dimension {space.dimension}, got shape {p.shape}"
        )
    if not np.all(np.isfinite(p)):
        raise GeometryError("Point has non-finite coordinates")
    if space.is_hyperbolic:
        if p[0] <= 0.0:
            raise GeometryError("Hyperboloid point must lie on the upper sheet (x0 > 0)")
        scale = max(1.0, -space.curvature * float(np.dot(p, p)))
        residual = abs(space.curvature * minkowski_inner(p, p) - 1.0)
        if residual > NORMALIZATION_TOL * scale:
            raise GeometryError(
                f"Point is off the hyperboloid <x,x> = 1/chi (relative residual {residual:.3e})"
            )
    return _frozen(project(space, p))


def point(space: ModelSpace, coords) -> ModelPoint:
    """Build a validated point from model coordinates."""
    return check_point(space, coords)


def lift_spatial(space: ModelSpace, spatial) -> ModelPoint:
    """
    Point whose last n coordinates are `spatial`.

    For euclidean space this is the point itself; on the hyperboloid the time
    coordinate is solved from the normalization.
    """
    spatial = np.asarray(spatial, dtype=float)
    if spatial.shape != (space.dimension,):
        raise GeometryError(f"Expected {space.dimension} spatial coordinates, got shape {spatial.shape}")
    if not space.is_hyperbolic:
        return _frozen(spatial.copy())
    return _frozen(project(space, np.concatenate([[0.0], spatial])))


def random_point(space: ModelSpace, rng: np.random.Generator, max_radius: float = 2.0) -> ModelPoint:
    """A point at distance <= max_radius from the origin, isotropic direction."""
    direction = rng.standard_normal(space.dimension)
    direction /= np.linalg.norm(direction)
    r = max_radius * rng.random()
    o = space.origin()
    frame = tangent_frame(space, o)
    return exp_map(space, o, r * (direction @ frame))


def random_points(space: ModelSpace, rng: np.random.Generator, count: int, max_radius: float = 2.0) -> NDArray[np.float64]:
    """`count` points as rows, drawn like random_point."""
    directions = rng.standard_normal((count, space.dimension))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    r = max_radius * rng.random(count)[:, None]
    if not space.is_hyperbolic:
        return r * directions
    rad = space.radius
    out = np.empty((count, space.ambient_dimension))
    out[:, 1:] = rad * np.sinh(r / rad) * directions
    return project(space, out)


def exp_many(space: ModelSpace, p: ModelPoint, vs: NDArray) -> NDArray[np.float64]:
    """exp_map of p along each row of vs (rows assumed tangent at p)."""
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    if not space.is_hyperbolic:
        return p + vs
    nv = np.sqrt(np.maximum(minkowski_inner(vs, vs), 0.0))[:, None]
    s = nv / space.radius
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(nv > 0.0, space.radius * np.sinh(s) / np.where(nv > 0.0, nv, 1.0), 0.0)
    return project(space, np.cosh(s) * p + scale * vs)


# -----------------------------------------------------------------------------
# Distance and geodesics
# -----------------------------------------------------------------------------

def distance(space: ModelSpace, p, q) -> float:
    """
    Geodesic distance between two points of `space`.

    The hyperbolic branch uses the Minkowski norm of p - q,
    acosh(1 + u) with u = -chi/2 * <p-q, p-q>_M, scaled by R; this equals
    R*acosh(chi*<p,q>_M) without its cancellation at short range.
    """
    p = check_point(space, p)
    q = check_point(space, q)
    return float(_distance_unchecked(space, p, q))


def distance_many(space: ModelSpace, p: ModelPoint, qs: NDArray) -> NDArray[np.float64]:
    """Distances from p to each row of qs (rows assumed valid points)."""
    return np.atleast_1d(_distance_unchecked(space, np.asarray(p, float), np.asarray(qs, float)))


def distance_broadcast(space: ModelSpace, p: NDArray, q: NDArray) -> NDArray[np.float64]:
    """Distances between broadcast-compatible stacks of points (rows assumed valid)."""
    return np.asarray(_distance_unchecked(space, np.asarray(p, float), np.asarray(q, float)))


def _distance_unchecked(space: ModelSpace, p: NDArray, q: NDArray):
    diff = p - q
    if not space.is_hyperbolic:
        return np.sqrt(np.sum(diff * diff, axis=-1))
    m = np.maximum(minkowski_inner(diff, diff), 0.0)
    return space.radius * acosh1p(-0.5 * space.curvature * m)


def log_map(space: ModelSpace, p, q) -> TangentVector:
    """Tangent vector at p pointing to q with norm d(p, q)."""
    p = check_point(space, p)
    q = check_point(space, q)
    if not space.is_hyperbolic:
        return q - p
    d = float(_distance_unchecked(space, p, q))
    v = q - space.curvature * minkowski_inner(p, q) * p
    v = v - space.curvature * minkowski_inner(p, v) * p
    nv = math.sqrt(max(float(minkowski_inner(v, v)), 0.0))
    if d == 0.0 or nv == 0.0:
        return np.zeros_like(p)
    return (d / nv) * v


def exp_map(space: ModelSpace, p, v) -> ModelPoint:
    """
    Point reached from p along the geodesic with initial velocity v in unit time.

    Raises:
        GeometryError: v has the wrong shape or is not tangent at p.
    """
    p = check_point(space, p)
    v = np.asarray(v, dtype=float)
    if v.shape != p.shape:
        raise GeometryError(f"Tangent vector shape {v.shape} does not match point shape {p.shape}")
    if not space.is_hyperbolic:
        return _frozen(p + v)
    pv = float(minkowski_inner(p, v))
    if abs(pv) > TANGENT_TOL * max(1.0, float(np.linalg.norm(p) * np.linalg.norm(v))):
        raise GeometryError(f"Vector is not tangent to the hyperboloid at p (<p,v> = {pv:.3e})")
    v = v - space.curvature * pv * p
    nv = math.sqrt(max(float(minkowski_inner(v, v)), 0.0))
    if nv == 0.0:
        return p
    s = nv / space.radius
    x = math.cosh(s) * p + (space.radius * math.sinh(s) / nv) * v
    return _frozen(project(space, x))


def interpolate(space: ModelSpace, p, q, t: float) -> ModelPoint:
    """
    The point (1-t)p + tq: gamma(t) on the geodesic gamma(0)=p, gamma(1)=q.

    Raises:
        GeometryError: t outside [0, 1].
    """
    if not 0.0 <= t <= 1.0:
        raise GeometryError(f"Interpolation parameter must lie in [0, 1], got {t}")
    p = check_point(space, p)
    q = check_point(space, q)
    if t == 0.0:
        return p
    if t == 1.0:
        return q
    if not space.is_hyperbolic:
        return _frozen((1.0 - t) * p + t * q)
    return exp_map(space, p, t * log_map(space, p, q))


# -----------------------------------------------------------------------------
# Tangent spaces
# -----------------------------------------------------------------------------

def tangent_inner(space: ModelSpace, u: NDArray, v: NDArray):
    if space.is_hyperbolic:
        return minkowski_inner(u, v)
    return np.sum(np.asarray(u) * np.asarray(v), axis=-1)


def tangent_norm(space: ModelSpace, v: NDArray) -> float:
    return math.sqrt(max(float(tangent_inner(space, v, v)), 0.0))


def tangent_angle(space: ModelSpace, u: NDArray, v: NDArray) -> float:
    """Angle between two nonzero tangent vectors at the same point."""
    nu, nv = tangent_norm(space, u), tangent_norm(space, v)
    if nu == 0.0 or nv == 0.0:
        raise GeometryError("Angle with a zero tangent vector is undefined")
    a, b = np.asarray(u) / nu, np.asarray(v) / nv
    return 2.0 * math.atan2(tangent_norm(space, a - b), tangent_norm(space, a + b))


def tangent_frame(space: ModelSpace, p) -> NDArray[np.float64]:
    """Orthonormal basis of T_p as the rows of an (n, ambient) array."""
    p = check_point(space, p)
    if not space.is_hyperbolic:
        return np.eye(space.dimension)
    rows = []
    for i in range(1, space.ambient_dimension):
        w = np.zeros(space.ambient_dimension)
        w[i] = 1.0
        w = w - space.curvature * minkowski_inner(p, w) * p
        for r in rows:
            w = w - minkowski_inner(r, w) * r
        rows.append(w / math.sqrt(float(minkowski_inner(w, w))))
    return np.array(rows)


@dataclass(frozen=True)
class GeodesicSegment:
    """
    A minimizing segment parametrized proportionally to arc length.

    `initial_direction` is a unit tangent vector at `start`; it is the zero
    vector for a zero-length (constant) segment.
    """
    space: ModelSpace
    start: ModelPoint
    end: ModelPoint
    length: float
    initial_direction: TangentVector

    def point_at(self, t: float) -> ModelPoint:
        """gamma(t), at distance t*length from start."""
        if not 0.0 <= t <= 1.0:
            raise GeometryError(f"Segment parameter must lie in [0, 1], got {t}")
        if self.length == 0.0 or t == 0.0:
            return self.start
        if t == 1.0:
            return self.end
        return exp_map(self.space, self.start, (t * self.length) * self.initial_direction)

    def points_at(self, ts) -> NDArray[np.float64]:
        """gamma evaluated at many parameters at once, one point per row."""
        ts = np.asarray(ts, dtype=float)
        if np.any(ts < 0.0) or np.any(ts > 1.0):
            raise GeometryError("Segment parameters must lie in [0, 1]")
        s = (ts * self.length)[:, None]
        if not self.space.is_hyperbolic:
            return self.start + s * self.initial_direction
        r = self.space.radius
        pts = np.cosh(s / r) * self.start + r * np.sinh(s / r) * self.initial_direction
        return project(self.space, pts)

    def final_direction(self) -> TangentVector:
        """Unit velocity at the end point (zero for a constant segment)."""
        if self.length == 0.0:
            return np.zeros_like(self.end)
        return -log_map(self.space, self.end, self.start) / self.length

    def to_dict(self) -> dict:
        return {
            "start": self.start.tolist(),
            "end": self.end.tolist(),
            "length": self.length,
            "initial_direction": self.initial_direction.tolist(),
        }


def geodesic(space: ModelSpace, p, q) -> GeodesicSegment:
    """The unique geodesic segment from p to q."""
    p = check_point(space, p)
    q = check_point(space, q)
    v = log_map(space, p, q)
    length = float(_distance_unchecked(space, p, q))
    direction = v / length if length > 0.0 else np.zeros_like(p)
    return GeodesicSegment(space, p, q, length, _frozen(direction))


# -----------------------------------------------------------------------------
# Comparison triangles
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonTriangle:
    """
    Triangle in the 2-dimensional model of curvature chi with prescribed sides.

    side_lengths are (d12, d13, d23); vertices are (p1*, p2*, p3*) with p1* at
    the origin and p2* on the first axis. `degenerate` marks the collinear case.
    """
    space: ModelSpace
    side_lengths: tuple[float, float, float]
    vertices: tuple[ModelPoint, ModelPoint, ModelPoint]
    degenerate: bool

    # side index -> (first vertex, second vertex, index into side_lengths)
    SIDES = ((0, 1, 0), (0, 2, 1), (1, 2, 2))


def _apex_angle(d12: float, d13: float, d23: float, curvature: float) -> float:
    """Angle at p1 from the half-angle law of cosines (stable near 0 and pi)."""
    a, b, c = d23, d13, d12
    s = 0.5 * (a + b + c)
    sa, sb, sc = max(s - a, 0.0), max(s - b, 0.0), max(s - c, 0.0)
    if curvature == 0.0:
        num, den = sb * sc, s * sa
    else:
        k = math.sqrt(-curvature)
        num = math.sinh(sb * k) * math.sinh(sc * k)
        den = math.sinh(s * k) * math.sinh(sa * k)
    if num == 0.0 and den == 0.0:
        return 0.0
    return 2.0 * math.atan2(math.sqrt(num), math.sqrt(den))


def comparison_triangle(d12: float, d13: float, d23: float, curvature: float) -> ComparisonTriangle:
    """
    Realise three side lengths as a triangle in the 2-dimensional model of curvature chi.

    Raises:
        GeometryError: negative or non-finite sides, chi > 0, or the triangle
            inequality violated by more than TRIANGLE_TOL (relative).
    """
    sides = (float(d12), float(d13), float(d23))
    if any(not math.isfinite(x) or x < 0.0 for x in sides):
        raise GeometryError(f"Side lengths must be finite and nonnegative, got {sides}")
    if curvature > 0.0:
        raise GeometryError(f"Comparison curvature must be <= 0, got {curvature}")
    longest = max(sides)
    slack = 2.0 * longest - sum(sides)
    tol = TRIANGLE_TOL * (1.0 + longest)
    if slack > tol:
        raise GeometryError(f"Side lengths {sides} violate the triangle inequality by {slack:.3e}")
    space = ModelSpace.euclidean(2) if curvature == 0.0 else ModelSpace.hyperbolic(2, curvature)
    theta = _apex_angle(*sides, curvature)
    o = space.origin()
    e1, e2 = tangent_frame(space, o)
    p2 = exp_map(space, o, sides[0] * e1)
    p3 = exp_map(space, o, sides[1] * (math.cos(theta) * e1 + math.sin(theta) * e2))
    degenerate = slack >= -tol
    if degenerate:
        logger.debug("[CONVEX] Degenerate comparison triangle %s", sides)
    return ComparisonTriangle(space, sides, (o, p2, p3), degenerate)


def comparison_point(tri: ComparisonTriangle, side_index: int, s: float) -> ModelPoint:
    """
    The point on side `side_index` at distance s from the side's first vertex.

    Sides are 0: [p1*, p2*], 1: [p1*, p3*], 2: [p2*, p3*].

    Raises:
        GeometryError: unknown side index or s outside [0, side length].
    """
    if side_index not in (0, 1, 2):
        raise GeometryError(f"Side index must be 0, 1 or 2, got {side_index}")
    i, j, k = ComparisonTriangle.SIDES[side_index]
    length = tri.side_lengths[k]
    tol = TRIANGLE_TOL * (1.0 + length)
    if s < -tol or s > length + tol:
        raise GeometryError(f"Arc parameter {s} outside [0, {length}]")
    if length == 0.0:
        return tri.vertices[i]
    t = min(max(s / length, 0.0), 1.0)
    return interpolate(tri.space, tri.vertices[i], tri.vertices[j], t)


def collinearity_residual(space: ModelSpace, points) -> float:
    """
    Largest distance from the given points to one maximal geodesic.

    The geodesic passes through the two mutually farthest points; the residual
    is 0 when all points coincide or lie on a common geodesic.
    """
    pts = [check_point(space, p) for p in points]
    if len(pts) < 3:
        return 0.0
    best, pair = -1.0, (0, 1)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = float(_distance_unchecked(space, pts[i], pts[j]))
            if d > best:
                best, pair = d, (i, j)
    if best == 0.0:
        return 0.0
    a = pts[pair[0]]
    u = log_map(space, a, pts[pair[1]]) / best
    residual = 0.0
    for x in pts:
        residual = max(residual, _distance_to_geodesic(space, a, u, x))
    return residual


def _distance_to_geodesic(space: ModelSpace, a: ModelPoint, u: TangentVector, x: ModelPoint) -> float:
    """Distance from x to the maximal geodesic through a with unit direction u."""
    if not space.is_hyperbolic:
        w = x - a
        w = w - np.dot(w, u) * u
        return float(np.linalg.norm(w))
    r = space.radius
    # Split x = alpha*a + beta*u + w with w Minkowski-orthogonal to span{a, u}.
    alpha = -minkowski_inner(x, a) / (r * r)
    beta = minkowski_inner(x, u)
    w = x - alpha * a - beta * u
    nw = math.sqrt(max(float(minkowski_inner(w, w)), 0.0))
    return r * math.asinh(nw / r)


# -----------------------------------------------------------------------------
# Row-wise batch kernels
# -----------------------------------------------------------------------------

def log_many(space: ModelSpace, ps: NDArray, qs: NDArray) -> NDArray[np.float64]:
    """log_map applied row by row (rows assumed valid points)."""
    ps = np.asarray(ps, dtype=float)
    qs = np.asarray(qs, dtype=float)
    if not space.is_hyperbolic:
        return qs - ps
    d = distance_broadcast(space, ps, qs)[..., None]
    v = qs - space.curvature * minkowski_inner(ps, qs)[..., None] * ps
    nv = np.sqrt(np.maximum(minkowski_inner(v, v), 0.0))[..., None]
    return np.where(nv > 0.0, v * (d / np.where(nv > 0.0, nv, 1.0)), 0.0)


def interpolate_many(space: ModelSpace, ps: NDArray, qs: NDArray, t: float) -> NDArray[np.float64]:
    """interpolate applied row by row with a common parameter t."""
    if not 0.0 <= t <= 1.0:
        raise GeometryError(f"Interpolation parameter must lie in [0, 1], got {t}")
    ps = np.asarray(ps, dtype=float)
    qs = np.asarray(qs, dtype=float)
    if not space.is_hyperbolic:
        return (1.0 - t) * ps + t * qs
    v = t * log_many(space, ps, qs)
    nv = np.sqrt(np.maximum(minkowski_inner(v, v), 0.0))[..., None]
    s = nv / space.radius
    scale = np.where(nv > 0.0, space.radius * np.sinh(s) / np.where(nv > 0.0, nv, 1.0), 0.0)
    return project(space, np.cosh(s) * ps + scale * v)


def collinearity_residual_many(space: ModelSpace, pts: NDArray) -> NDArray[np.float64]:
    """collinearity_residual for each group pts[b] of K points, shape (B, K, ambient)."""
    pts = np.asarray(pts, dtype=float)
    b, k, _ = pts.shape
    pair = distance_broadcast(space, pts[:, :, None, :], pts[:, None, :, :]).reshape(b, k * k)
    flat = np.argmax(pair, axis=1)
    i, j = flat // k, flat % k
    rows = np.arange(b)
    a, c = pts[rows, i], pts[rows, j]
    d = pair[rows, flat][:, None]
    safe = np.where(d > 0.0, d, 1.0)
    u = log_many(space, a, c) / safe
    if not space.is_hyperbolic:
        w = pts - a[:, None, :]
        w = w - np.sum(w * u[:, None, :], axis=-1, keepdims=True) * u[:, None, :]
        dist = np.linalg.norm(w, axis=-1)
    else:
        r = space.radius
        alpha = -minkowski_inner(pts, a[:, None, :]) / (r * r)
        beta = minkowski_inner(pts, u[:, None, :])
        w = pts - alpha[..., None] * a[:, None, :] - beta[..., None] * u[:, None, :]
        dist = r * np.arcsinh(np.sqrt(np.maximum(minkowski_inner(w, w), 0.0)) / r)
    return np.where(d[:, 0] > 0.0, np.max(dist, axis=1), 0.0)
