"""
Deck transformation groups and orbit enumeration.

Flat tori are quotients of R^n by a lattice of translations; compact
hyperbolic surfaces are quotients of H_chi by a Fuchsian group acting by
Minkowski-orthogonal matrices on the hyperboloid. The enumerators here list
every lift of a point inside a metric ball, which is what makes the minimum
over lifts of the quotient distance a finite computation.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from ..errors import BudgetExceededError, GeometryError
from .model_spaces import (
    ModelPoint,
    ModelSpace,
    check_point,
    distance_many,
    minkowski_form,
    project,
)

logger = logging.getLogger(__name__)

MINKOWSKI_TOL = 1e-9
SEP_TOL = 1e-6
MATRIX_SEP_TOL = 1e-6
TIE_TOL = 1e-9
DEFAULT_NODE_BUDGET = 200_000
MAX_REDUCTION_STEPS = 10_000


class IsometryKind(str, Enum):
    TRANSLATION = "translation"
    MATRIX = "matrix"


@dataclass(frozen=True, eq=False)
class Isometry:
    """
    A deck transformation.

    `data` is a translation vector or an (n+1)x(n+1) matrix in O+(n,1).
    `word` lists signed 1-based generator indices; the element equals the
    product s_{w1} s_{w2} ... s_{wk}, with s_{-i} the inverse of generator i.
    """
    kind: IsometryKind
    data: NDArray[np.float64]
    word: tuple[int, ...] = ()

    @classmethod
    def translation(cls, vector, word: Sequence[int] = ()) -> "Isometry":
        v = np.array(vector, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise GeometryError(f"Translation must be a finite vector, got shape {v.shape}")
        v.setflags(write=False)
        return cls(IsometryKind.TRANSLATION, v, tuple(word))

    @classmethod
    def matrix(cls, m, word: Sequence[int] = (), check: bool = True) -> "Isometry":
        m = np.array(m, dtype=float)
        if check:
            check_minkowski(m)
        m.setflags(write=False)
        return cls(IsometryKind.MATRIX, m, tuple(word))

    @classmethod
    def identity(cls, space: ModelSpace) -> "Isometry":
        if space.is_hyperbolic:
            return cls.matrix(np.eye(space.ambient_dimension), check=False)
        return cls.translation(np.zeros(space.dimension))

    def compose(self, other: "Isometry") -> "Isometry":
        """self * other (apply other first)."""
        if self.kind is not other.kind:
            raise GeometryError("Cannot compose a translation with a matrix isometry")
        if self.kind is IsometryKind.TRANSLATION:
            return Isometry.translation(self.data + other.data, self.word + other.word)
        return Isometry.matrix(self.data @ other.data, self.word + other.word, check=False)

    def inverse(self) -> "Isometry":
        word = tuple(-w for w in reversed(self.word))
        if self.kind is IsometryKind.TRANSLATION:
            return Isometry.translation(-self.data, word)
        j = minkowski_form(self.data.shape[0])
        return Isometry.matrix(j @ self.data.T @ j, word, check=False)

    def to_list(self) -> list:
        return self.data.tolist()


def check_minkowski(m: NDArray) -> None:
    """
    Raise unless m preserves the Minkowski form and the upper sheet.

    Raises:
        GeometryError: non-square, M^T J M != J beyond tolerance, or M[0,0] <= 0.
    """
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 3:
        raise GeometryError(f"Isometry matrix must be square of size >= 3, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise GeometryError("Isometry matrix has non-finite entries")
    j = minkowski_form(m.shape[0])
    err = float(np.max(np.abs(m.T @ j @ m - j)))
    scale = max(1.0, float(np.max(np.abs(m))) ** 2)
    if err > MINKOWSKI_TOL * scale:
        raise GeometryError(f"Matrix does not preserve the Minkowski form (max error {err:.3e})")
    if m[0, 0] <= 0.0:
        raise GeometryError("Matrix swaps the sheets of the hyperboloid")


def apply(g: Isometry, p, space: Optional[ModelSpace] = None) -> ModelPoint:
    """
    g . p

    With `space` given the point is validated and the image re-projected.
    """
    if space is not None:
        p = check_point(space, p)
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != g.data.shape[-1]:
        raise GeometryError(f"Isometry of size {g.data.shape[-1]} cannot act on a point of size {p.shape[-1]}")
    if g.kind is IsometryKind.TRANSLATION:
        out = p + g.data
    else:
        out = g.data @ p
        if space is not None:
            out = project(space, out)
    out = np.array(out)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class OrbitPoint:
    """A lift g . base inside an enumeration ball."""
    point: ModelPoint
    element: Isometry
    dist_to_center: float

    def to_dict(self) -> dict:
        return {
            "point": self.point.tolist(),
            "word": list(self.element.word),
            "dist_to_center": self.dist_to_center,
        }


@dataclass(frozen=True, eq=False)
class QuotientSpace:
    """
    A model space divided by a discrete group of deck transformations.

    Attributes:
        model: the universal cover
        generators: lattice basis translations or Fuchsian generators
        injectivity_floor: lower bound on the displacement of every non-identity
            element at base_lift
        base_lift: reference point of the fundamental domain
        circumradius: radius of a ball about base_lift containing the fundamental domain
        name: label used in reports
    """
    model: ModelSpace
    generators: tuple[Isometry, ...]
    injectivity_floor: float
    base_lift: ModelPoint
    circumradius: float
    name: str = ""

    def __post_init__(self):
        if not self.generators:
            raise GeometryError("A quotient space needs at least one generator")
        kinds = {g.kind for g in self.generators}
        expected = IsometryKind.MATRIX if self.model.is_hyperbolic else IsometryKind.TRANSLATION
        if kinds != {expected}:
            raise GeometryError(f"{self.model.kind.value} quotients need {expected.value} generators")
        if self.injectivity_floor <= 0.0:
            raise GeometryError("injectivity_floor must be positive")
        object.__setattr__(self, "base_lift", check_point(self.model, self.base_lift))

    @property
    def kind(self) -> str:
        return "fuchsian" if self.model.is_hyperbolic else "lattice"

    @property
    def basis(self) -> NDArray[np.float64]:
        """Lattice basis vectors as rows (lattice quotients only)."""
        if self.model.is_hyperbolic:
            raise GeometryError("Only lattice quotients have a translation basis")
        return np.array([g.data for g in self.generators])

    @cached_property
    def signed_generators(self) -> tuple[tuple[int, Isometry], ...]:
        """Generators and inverses labelled +i / -i."""
        out = []
        for i, g in enumerate(self.generators, start=1):
            out.append((i, Isometry(g.kind, g.data, (i,))))
            inv = g.inverse()
            out.append((-i, Isometry(inv.kind, inv.data, (-i,))))
        return tuple(out)

    @cached_property
    def max_generator_displacement(self) -> float:
        images = np.array([apply(g, self.base_lift) for _, g in self.signed_generators])
        if self.model.is_hyperbolic:
            images = project(self.model, images)
        return float(np.max(distance_many(self.model, self.base_lift, images)))

    @cached_property
    def prune_slack(self) -> float:
        """Slack added to the enumeration radius when pruning word-ball BFS."""
        return max(self.max_generator_displacement, 2.0 * self.circumradius)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "name": self.name,
            "dimension": self.model.dimension,
            "curvature": self.model.curvature,
            "generators": [g.to_list() for g in self.generators],
            "base_lift": self.base_lift.tolist(),
            "circumradius": self.circumradius,
            "injectivity_floor": self.injectivity_floor,
        }


# -----------------------------------------------------------------------------
# Lattices
# -----------------------------------------------------------------------------

def _check_basis(basis) -> NDArray[np.float64]:
    b = np.array(basis, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] < 2:
        raise GeometryError(f"Lattice basis must be a square n x n matrix with n >= 2, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise GeometryError("Lattice basis has non-finite entries")
    sv = np.linalg.svd(b, compute_uv=False)
    if sv[-1] <= 1e-12 * max(sv[0], 1.0):
        raise GeometryError(f"Lattice basis is singular (smallest singular value {sv[-1]:.3e})")
    return b


def _sort_orbit(points: list[OrbitPoint]) -> list[OrbitPoint]:
    return sorted(points, key=lambda o: (round(o.dist_to_center, 10), tuple(np.round(o.point, 10))))


def _lattice_word(coeffs: NDArray) -> tuple[int, ...]:
    word: list[int] = []
    for i, c in enumerate(coeffs, start=1):
        word.extend([i if c > 0 else -i] * abs(int(c)))
    return tuple(word)


def lattice_orbit(basis, center, radius: float, lift=None) -> list[OrbitPoint]:
    """
    Every lattice translate of `lift` within `radius` of `center`.

    Exhaustive: integer coefficients m satisfy |m - m0| <= radius / s_min, where
    m0 solves B^T m0 = center - lift and s_min is the smallest singular value.
    Sorted by distance, then coordinates.

    Raises:
        GeometryError: singular basis, negative radius or mismatched shapes.
    """
    b = _check_basis(basis)
    n = b.shape[0]
    if radius < 0.0:
        raise GeometryError(f"Radius must be nonnegative, got {radius}")
    space = ModelSpace.euclidean(n)
    center = check_point(space, center)
    lift = np.zeros(n) if lift is None else check_point(space, lift)
    m0 = np.linalg.solve(b.T, center - lift)
    reach = radius / np.linalg.svd(b, compute_uv=False)[-1]
    ranges = [
        np.arange(math.ceil(m0[i] - reach - 1e-9), math.floor(m0[i] + reach + 1e-9) + 1)
        for i in range(n)
    ]
    coeffs = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, n)
    pts = lift + coeffs @ b
    dists = np.sqrt(np.sum((pts - center) ** 2, axis=1))
    keep = dists <= radius + 1e-12 * (1.0 + radius)
    out = []
    for m, p, d in zip(coeffs[keep], pts[keep], dists[keep]):
        p = np.array(p)
        p.setflags(write=False)
        out.append(OrbitPoint(p, Isometry.translation(m @ b, _lattice_word(m)), float(d)))
    return _sort_orbit(out)


def lattice_group(basis, name: str = "") -> QuotientSpace:
    """The flat torus R^n / (Z b_1 + ... + Z b_n), basis vectors given as rows."""
    b = _check_basis(basis)
    n = b.shape[0]
    generators = tuple(Isometry.translation(row, (i,)) for i, row in enumerate(b, start=1))
    shortest = min(
        o.dist_to_center
        for o in lattice_orbit(b, np.zeros(n), float(np.min(np.linalg.norm(b, axis=1))))
        if o.dist_to_center > 0.0
    )
    corners = np.array(np.meshgrid(*[[0, 1]] * n, indexing="ij")).reshape(n, -1).T @ b
    circumradius = float(np.max(np.linalg.norm(corners, axis=1)))
    return QuotientSpace(ModelSpace.euclidean(n), generators, shortest, np.zeros(n), circumradius, name)


def square_basis() -> NDArray[np.float64]:
    return np.eye(2)


def hexagonal_basis() -> NDArray[np.float64]:
    return np.array([[1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])


def generic_basis() -> NDArray[np.float64]:
    """A lattice not generated by two orthogonal vectors."""
    return np.array([[1.0, 0.0], [0.35, 1.05]])


# -----------------------------------------------------------------------------
# Fuchsian groups
# -----------------------------------------------------------------------------

def _rotation(theta: float) -> NDArray[np.float64]:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _boost(length: float) -> NDArray[np.float64]:
    """Unit-curvature translation by `length` along the first spatial axis."""
    ch, sh = math.cosh(length), math.sinh(length)
    return np.array([[ch, sh, 0.0], [sh, ch, 0.0], [0.0, 0.0, 1.0]])


def _octagon_side_pairing(i: int, k: int, inradius: float) -> NDArray[np.float64]:
    """
    The orientation-preserving isometry carrying side i of the regular octagon
    onto side k, with the octagon mapped across side k.

    Side j has its outward midpoint at angle j*pi/4.
    """
    step = math.pi / 4.0
    return _rotation(k * step) @ _boost(2.0 * inradius) @ _rotation(math.pi) @ _rotation(-i * step)


def octagon_group(curvature: float = -1.0) -> QuotientSpace:
    """
    The genus-2 surface glued from the regular hyperbolic octagon with angles pi/4.

    The generators a, b, c, d pair sides (1->3), (2->0), (5->7), (6->4) and
    satisfy a b a^-1 b^-1 c d c^-1 d^-1 = 1. At unit curvature the inradius r
    solves cosh r = cot(pi/8) and the circumradius R solves cosh R = cot(pi/8)^2.

    Raises:
        GeometryError: the constructed generators fail the relator check.
    """
    space = ModelSpace.hyperbolic(2, curvature)
    cot = 1.0 / math.tan(math.pi / 8.0)
    inradius = math.acosh(cot)
    circumradius = math.acosh(cot * cot)
    pairs = ((1, 3), (2, 0), (5, 7), (6, 4))
    generators = tuple(
        Isometry.matrix(_octagon_side_pairing(i, k, inradius), (idx,))
        for idx, (i, k) in enumerate(pairs, start=1)
    )
    relator = evaluate_word_matrices([g.data for g in generators], OCTAGON_RELATOR)
    err = float(np.max(np.abs(relator - np.eye(3))))
    if err > 1e-8:
        raise GeometryError(f"Octagon generators fail the surface relator (error {err:.3e})")
    logger.debug("[ORBIT] Octagon group built, relator error %.3e", err)
    r = space.radius
    return QuotientSpace(
        model=space,
        generators=generators,
        injectivity_floor=2.0 * inradius * r,
        base_lift=space.origin(),
        circumradius=circumradius * r,
        name="octagon",
    )


# a b a^-1 b^-1 c d c^-1 d^-1
OCTAGON_RELATOR = (1, 2, -1, -2, 3, 4, -3, -4)


def evaluate_word_matrices(generators: Sequence[NDArray], word: Sequence[int]) -> NDArray[np.float64]:
    size = generators[0].shape[0]
    j = minkowski_form(size)
    out = np.eye(size)
    for w in word:
        g = generators[abs(w) - 1]
        out = out @ (g if w > 0 else j @ g.T @ j)
    return out


def evaluate_word(space: QuotientSpace, word: Sequence[int]) -> Isometry:
    """The element s_{w1} ... s_{wk} of the deck group."""
    out = Isometry.identity(space.model)
    for w in word:
        if w == 0 or abs(w) > len(space.generators):
            raise GeometryError(f"Word letter {w} does not name a generator")
        g = space.generators[abs(w) - 1]
        out = out.compose(g if w > 0 else g.inverse())
    return Isometry(out.kind, out.data, tuple(word))


def translation_length(g: Isometry, space: Optional[ModelSpace] = None) -> float:
    """Minimal displacement of g (its translation length)."""
    if g.kind is IsometryKind.TRANSLATION:
        return float(np.linalg.norm(g.data))
    r = space.radius if space is not None else 1.0
    if g.data.shape[0] == 3:
        return r * math.acosh(max(1.0, 0.5 * (float(np.trace(g.data)) - 1.0)))
    return r * math.log(max(1.0, float(np.max(np.abs(np.linalg.eigvals(g.data))))))


def displacement(space: QuotientSpace, g: Isometry, p) -> float:
    """d(p, g . p)."""
    p = check_point(space.model, p)
    return float(distance_many(space.model, p, apply(g, p, space.model)[None, :])[0])


class _OrbitIndex:
    """Spatial hash deduplicating orbit points and group elements."""

    def __init__(self, space: ModelSpace, cell: float, sep_tol: float):
        self.space = space
        self.cell = cell
        self.sep_tol = sep_tol
        self.cells: dict[tuple[int, ...], list[int]] = {}
        self.points: list[NDArray] = []
        self.matrices: list[NDArray] = []

    def _keys(self, p: NDArray) -> list[tuple[int, ...]]:
        q = p / self.cell
        base = np.floor(q)
        frac = q - base
        options = []
        for b, f in zip(base.astype(int), frac):
            opts = [b]
            if f < 1e-3:
                opts.append(b - 1)
            elif f > 1.0 - 1e-3:
                opts.append(b + 1)
            options.append(opts)
        keys = [()]
        for opts in options:
            keys = [k + (o,) for k in keys for o in opts]
        return keys

    def add(self, p: NDArray, m: NDArray) -> Optional[int]:
        """Insert unless an equal element is already known; return the new index."""
        keys = self._keys(p)
        for key in keys:
            for idx in self.cells.get(key, ()):
                q = self.points[idx]
                if distance_many(self.space, p, q[None, :])[0] < self.sep_tol:
                    mm = self.matrices[idx]
                    scale = max(1.0, float(np.linalg.norm(mm)))
                    if np.linalg.norm(mm - m) < MATRIX_SEP_TOL * scale:
                        return None
        idx = len(self.points)
        self.points.append(p)
        self.matrices.append(m)
        self.cells.setdefault(keys[0], []).append(idx)
        return idx


def _bfs(
    space: QuotientSpace,
    x: NDArray,
    keep,
    max_length: Optional[int],
    node_budget: int,
    sep_tol: float,
) -> tuple[list[NDArray], list[NDArray], list[tuple[int, ...]]]:
    """
    Breadth-first search over reduced words, expanding frontiers in batches.

    `keep(points)` returns a boolean mask of candidates to retain and expand.
    """
    model = space.model
    labels = [s for s, _ in space.signed_generators]
    gens = np.array([g.data for _, g in space.signed_generators])
    size = model.ambient_dimension
    index = _OrbitIndex(model, cell=max(space.injectivity_floor / 4.0, 1e-3), sep_tol=sep_tol)
    words: list[tuple[int, ...]] = []
    index.add(x, np.eye(size))
    words.append(())
    frontier = [0]
    length = 0
    while frontier and (max_length is None or length < max_length):
        mats = np.array([index.matrices[i] for i in frontier])
        cand = np.einsum("fij,gjk->fgik", mats, gens).reshape(-1, size, size)
        pts = project(model, cand @ x)
        mask = keep(pts)
        new_frontier = []
        for c in np.flatnonzero(mask):
            parent = frontier[c // len(labels)]
            label = labels[c % len(labels)]
            word = words[parent]
            if word and word[-1] == -label:
                continue
            idx = index.add(pts[c], cand[c])
            if idx is None:
                continue
            words.append(word + (label,))
            new_frontier.append(idx)
            if len(words) > node_budget:
                raise BudgetExceededError(
                    f"Orbit enumeration of '{space.name or space.kind}' visited more than {node_budget} elements",
                    budget="node_budget",
                    limit=node_budget,
                )
        frontier = new_frontier
        length += 1
    return index.points, index.matrices, words


def reduce_to_domain(space: QuotientSpace, p) -> tuple[ModelPoint, Isometry]:
    """
    Move a lift into the fundamental domain; returns (h . p, h).

    Lattices use the parallelepiped of fractional coordinates in [0, 1).
    Fuchsian groups use greedy descent toward base_lift over the side
    pairings, which ends in the Dirichlet domain when the generators are its
    side pairings.
    """
    model = space.model
    p = check_point(model, p)
    if not model.is_hyperbolic:
        b = space.basis
        coeffs = np.linalg.solve(b.T, p - space.base_lift)
        shift = np.floor(coeffs + 1e-12)
        h = Isometry.translation(-(shift @ b), _lattice_word(-shift.astype(int)))
        return apply(h, p), h
    h = Isometry.identity(model)
    current = p
    d_now = float(distance_many(model, space.base_lift, current[None, :])[0])
    for _ in range(MAX_REDUCTION_STEPS):
        images = project(model, np.array([g.data @ current for _, g in space.signed_generators]))
        dists = distance_many(model, space.base_lift, images)
        best = int(np.argmin(dists))
        if dists[best] >= d_now - 1e-12:
            out = np.array(current)
            out.setflags(write=False)
            return out, h
        h = space.signed_generators[best][1].compose(h)
        current = images[best]
        d_now = float(dists[best])
    raise BudgetExceededError(
        "Fundamental-domain reduction did not terminate", budget="max_reduction_steps", limit=MAX_REDUCTION_STEPS
    )


def fuchsian_orbit(
    space: QuotientSpace,
    center,
    radius: float,
    lift=None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    sep_tol: float = SEP_TOL,
) -> list[OrbitPoint]:
    """
    Every orbit point g . lift within `radius` of `center` (lift defaults to base_lift).

    Word-ball BFS from the identity, abandoning a word once its image is
    farther than max(radius, d(center, lift)) + prune_slack from the center;
    the lift is first reduced into the fundamental domain so that every orbit
    point in the ball is reachable through a chain of retained words.

    Raises:
        GeometryError: negative radius or invalid points.
        BudgetExceededError: more than `node_budget` elements retained.
    """
    if radius < 0.0:
        raise GeometryError(f"Radius must be nonnegative, got {radius}")
    model = space.model
    center = check_point(model, center)
    lift = space.base_lift if lift is None else check_point(model, lift)
    reduced, h = reduce_to_domain(space, lift)
    d_lift = float(distance_many(model, center, reduced[None, :])[0])
    threshold = max(radius, d_lift) + space.prune_slack

    def keep(pts):
        return distance_many(model, center, pts) <= threshold

    points, mats, words = _bfs(space, reduced, keep, None, node_budget, sep_tol)
    pts = np.array(points)
    dists = distance_many(model, center, pts)
    out = []
    for i in np.flatnonzero(dists <= radius + 1e-12 * (1.0 + radius)):
        g = Isometry.matrix(mats[i] @ h.data, words[i] + h.word, check=False)
        p = np.array(pts[i])
        p.setflags(write=False)
        out.append(OrbitPoint(p, g, float(dists[i])))
    logger.debug("[ORBIT] %d of %d elements inside radius %.4f", len(out), len(points), radius)
    return _sort_orbit(out)


def word_ball(space: QuotientSpace, length: int, lift=None, sep_tol: float = SEP_TOL) -> list[OrbitPoint]:
    """
    Unpruned brute force: all distinct elements of word length <= `length`.

    dist_to_center is measured from the lift itself.
    """
    model = space.model
    x = space.base_lift if lift is None else check_point(model, lift)
    points, mats, words = _bfs(
        space, x, lambda pts: np.ones(len(pts), dtype=bool), length, DEFAULT_NODE_BUDGET * 10, sep_tol
    )
    pts = np.array(points)
    dists = distance_many(model, x, pts)
    out = []
    for p, m, w, d in zip(pts, mats, words, dists):
        p = np.array(p)
        p.setflags(write=False)
        out.append(OrbitPoint(p, Isometry.matrix(m, w, check=False), float(d)))
    return _sort_orbit(out)


def orbit(
    space: QuotientSpace,
    center,
    radius: float,
    lift=None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    sep_tol: float = SEP_TOL,
) -> list[OrbitPoint]:
    """Dispatch to the lattice or Fuchsian enumerator; sep_tol only matters for the latter."""
    if space.model.is_hyperbolic:
        return fuchsian_orbit(space, center, radius, lift=lift, node_budget=node_budget, sep_tol=sep_tol)
    return lattice_orbit(space.basis, center, radius, lift=space.base_lift if lift is None else lift)


def injectivity_radius(space: QuotientSpace, p, max_doublings: int = 8) -> float:
    """Half the smallest nontrivial deck displacement at p."""
    p = check_point(space.model, p)
    radius = max(2.0 * space.circumradius, space.injectivity_floor)
    for _ in range(max_doublings):
        others = [o.dist_to_center for o in orbit(space, p, radius, lift=p) if o.dist_to_center > SEP_TOL]
        if others:
            return 0.5 * min(others)
        radius *= 2.0
    raise BudgetExceededError("No nontrivial orbit point found", budget="max_doublings", limit=max_doublings)


def fiber_gap(orbit_points: Sequence[OrbitPoint], k: int, tie_tol: float = TIE_TOL) -> float:
    """
    Gap between the k-th and (k+1)-th smallest orbit distances.

    This is the constructive counterpart of the existential epsilon_0 separating
    the k nearest lifts from the rest of the fiber. Returns 0 when the two
    distances tie within `tie_tol` or when no (k+1)-th point was enumerated.

    Raises:
        GeometryError: k < 1 or fewer than k orbit points.
    """
    if k < 1:
        raise GeometryError(f"k must be >= 1, got {k}")
    if len(orbit_points) < k:
        raise GeometryError(f"Need at least {k} orbit points, got {len(orbit_points)}")
    if len(orbit_points) == k:
        return 0.0
    dists = sorted(o.dist_to_center for o in orbit_points)
    gap = dists[k] - dists[k - 1]
    return gap if gap > tie_tol else 0.0


# -----------------------------------------------------------------------------
# Serialization
# -----------------------------------------------------------------------------

def quotient_space_from_dict(doc: dict) -> QuotientSpace:
    """
    Rebuild a quotient space from its JSON document.

    Raises:
        GeometryError: unknown kind or malformed generators.
    """
    kind = doc.get("kind")
    name = doc.get("name", "")
    if kind == "lattice":
        return lattice_group(doc["generators"], name=name)
    if kind != "fuchsian":
        raise GeometryError(f"Unknown quotient space kind: {kind!r}")
    model = ModelSpace.hyperbolic(int(doc["dimension"]), float(doc["curvature"]))
    generators = tuple(Isometry.matrix(m, (i,)) for i, m in enumerate(doc["generators"], start=1))
    base = np.array(doc.get("base_lift", model.origin()), dtype=float)
    floor = doc.get("injectivity_floor")
    if floor is None:
        floor = min(
            float(distance_many(model, base, apply(g, base, model)[None, :])[0]) for g in generators
        )
    circumradius = float(doc.get("circumradius", floor))
    return QuotientSpace(model, generators, float(floor), base, circumradius, name)


def save_quotient_space(space: QuotientSpace, path: str | Path) -> None:
    Path(path).write_text(json.dumps(space.to_dict(), indent=2))


def load_quotient_space(path: str | Path) -> QuotientSpace:
    return quotient_space_from_dict(json.loads(Path(path).read_text()))
