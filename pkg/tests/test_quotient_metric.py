import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.errors import ConvergenceError, GeolabWarning, GeometryError
from src.geometry import quotient_metric
from src.geometry.deck_groups import (
    apply,
    generic_basis,
    hexagonal_basis,
    lattice_group,
    lattice_orbit,
    octagon_group,
    orbit,
    reduce_to_domain,
    square_basis,
)
from src.geometry.model_spaces import distance, interpolate, lift_spatial
from src.geometry.quotient_metric import (
    DistanceEnvelope,
    MaxKind,
    MaxPair,
    SearchSettings,
    default_seeds,
    exceptional_lines,
    find_farthest_point,
    find_max_pair,
    lines_in_general_position,
    order_map,
    quotient_distance,
    relative_min_tol,
    segment_bundle,
    strict_max_probe,
)


@pytest.fixture(scope="module")
def square():
    return lattice_group(square_basis(), name="square")


@pytest.fixture(scope="module")
def hexagonal():
    return lattice_group(hexagonal_basis(), name="hexagonal")


@pytest.fixture(scope="module")
def generic():
    return lattice_group(generic_basis(), name="generic")


@pytest.fixture(scope="module")
def octagon():
    return octagon_group()


@pytest.fixture(scope="module")
def vertex(octagon):
    # All eight octagon vertices are one point of the surface
    theta = math.pi / 8.0
    r = math.sinh(octagon.circumradius)
    return lift_spatial(octagon.model, [r * math.cos(theta), r * math.sin(theta)])


def _brute_force_torus_distance(basis, p, q):
    m = np.stack(np.meshgrid(np.arange(-10, 11), np.arange(-10, 11)), axis=-1).reshape(-1, 2)
    return float(np.min(np.linalg.norm(np.asarray(q) + m @ basis - np.asarray(p), axis=1)))


# =============================================================================
# Distances and segment bundles on tori
# =============================================================================

class TestTorusDistance:

    def test_square_torus_deep_hole(self, square):
        assert quotient_distance(square, [0.0, 0.0], [0.5, 0.5]) == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-12)
        bundle = segment_bundle(square, [0.0, 0.0], [0.5, 0.5], min_tol=1e-7)
        assert bundle.order == 4
        assert not bundle.near_tie

    def test_same_point(self, square):
        # 1.3 - 1 leaves a rounding residue of order 1e-17
        bundle = segment_bundle(square, [0.3, 0.3], [1.3, 0.3])
        assert bundle.distance == 0.0
        assert bundle.order == 1
        assert bundle.segments[0].length == 0.0
        assert quotient_distance(square, [0.3, 0.3], [1.3, 0.3]) == 0.0

    def test_edge_midpoint_has_two_segments(self, square):
        assert segment_bundle(square, [0.0, 0.0], [0.5, 0.2]).order == 2

    def test_hexagonal_deep_hole(self, hexagonal):
        hole = np.array([0.5, 0.5 / math.sqrt(3.0)])
        bundle = segment_bundle(hexagonal, [0.0, 0.0], hole)
        assert bundle.order == 3
        assert bundle.distance == pytest.approx(1.0 / math.sqrt(3.0))

    @given(
        st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3),
    )
    def test_matches_lattice_scan(self, x1, y1, x2, y2):
        b = generic_basis()
        space = lattice_group(b)
        expected = _brute_force_torus_distance(b, [x1, y1], [x2, y2])
        assert quotient_distance(space, [x1, y1], [x2, y2]) == pytest.approx(expected, abs=1e-12)

    def test_distance_is_invariant_under_deck_group(self, generic):
        p = np.array([0.2, 0.7])
        q = np.array([0.9, 0.1])
        shifted = q + 3 * generic.basis[0] - 2 * generic.basis[1]
        assert quotient_distance(generic, p, shifted) == pytest.approx(quotient_distance(generic, p, q), abs=1e-12)

    def test_segments_have_distinct_directions(self, square):
        bundle = segment_bundle(square, [0.0, 0.0], [0.5, 0.5])
        dirs = np.array([s.initial_direction for s in bundle.segments])
        assert len({tuple(np.round(d, 9)) for d in dirs}) == 4
        assert all(s.length == pytest.approx(bundle.distance) for s in bundle.segments)

    def test_near_tie_warns(self, square):
        with pytest.warns(GeolabWarning):
            bundle = segment_bundle(square, [0.0, 0.0], [0.5, 0.5 + 5e-9], min_tol=1e-9)
        assert bundle.near_tie
        assert bundle.order == 2

    def test_relative_tolerance(self, square):
        tol = relative_min_tol(1e-7)
        bundle = segment_bundle(square, [0.0, 0.0], [0.5, 0.5], min_tol=tol)
        assert bundle.min_tol == pytest.approx(1e-7 * (1.0 + math.sqrt(0.5)))

    def test_bad_tolerance(self, square):
        with pytest.raises(GeometryError):
            segment_bundle(square, [0.0, 0.0], [0.5, 0.5], min_tol=0.0)

    def test_bundle_json(self, square):
        doc = segment_bundle(square, [0.0, 0.0], [0.5, 0.5]).to_dict()
        assert doc["order"] == 4
        assert len(doc["lifts"]) == len(doc["words"]) == len(doc["segments"]) == 4
        assert doc["near_tie"] is False

    def test_order_map(self, square):
        grid = np.array([[0.5, 0.5], [0.25, 0.25], [0.5, 0.1]])
        np.testing.assert_array_equal(order_map(square, [0.0, 0.0], grid), [4, 1, 2])

    def test_exceptional_lines_of_torus_bundle(self, square):
        bundle = segment_bundle(square, [0.0, 0.0], [0.5, 0.5])
        lines = exceptional_lines(bundle)
        assert len(lines) == 4
        # On a flat torus the constant direction moves both points the same way
        for u1, u2 in lines:
            np.testing.assert_allclose(u1, u2, atol=1e-12)
        # Opposite segments span the same line
        assert not lines_in_general_position(bundle)

    def test_two_segment_lines_in_general_position(self, square):
        bundle = segment_bundle(square, [0.0, 0.0], [0.5, 0.2])
        assert len(exceptional_lines(bundle)) == 2
        assert lines_in_general_position(bundle)


# =============================================================================
# Hyperbolic surface
# =============================================================================

class TestSurfaceDistance:

    def test_distance_never_exceeds_model_distance(self, octagon):
        p = lift_spatial(octagon.model, [0.3, -0.4])
        q = lift_spatial(octagon.model, [-2.0, 1.5])
        assert quotient_distance(octagon, p, q) <= distance(octagon.model, p, q) + 1e-12

    def test_distance_bounded_by_diameter(self, octagon, rng):
        for _ in range(5):
            p = lift_spatial(octagon.model, rng.uniform(-3, 3, 2))
            q = lift_spatial(octagon.model, rng.uniform(-3, 3, 2))
            assert quotient_distance(octagon, p, q) <= 2.0 * octagon.circumradius + 1e-9

    def test_invariant_under_reduction(self, octagon):
        p = lift_spatial(octagon.model, [0.1, 0.2])
        q = lift_spatial(octagon.model, [25.0, -9.0])
        reduced, _ = reduce_to_domain(octagon, q)
        assert quotient_distance(octagon, p, q) == pytest.approx(quotient_distance(octagon, p, reduced), abs=1e-9)

    def test_vertex_is_reached_eight_times(self, octagon, vertex):
        bundle = segment_bundle(octagon, octagon.base_lift, vertex)
        assert bundle.distance == pytest.approx(octagon.circumradius, abs=1e-9)
        assert bundle.order == 8

    def test_symmetric(self, octagon):
        p = lift_spatial(octagon.model, [0.3, -0.4])
        q = lift_spatial(octagon.model, [-1.0, 0.9])
        assert quotient_distance(octagon, p, q) == pytest.approx(quotient_distance(octagon, q, p), abs=1e-10)

    def test_large_reach_stays_within_budget(self, octagon, vertex):
        # d0 + margin lands just past the starting radius of 2 * circumradius
        env = DistanceEnvelope.around(
            octagon, octagon.base_lift, vertex, margin=1.1 * octagon.circumradius, node_budget=50_000
        )
        assert env.value == pytest.approx(octagon.circumradius, abs=1e-9)
        assert len(env.elements) >= 8

    def test_order_survives_rescaling(self, octagon, vertex):
        steep = octagon_group(-4.0)
        generic_point = lift_spatial(octagon.model, [0.4, -0.3])
        for target in (vertex, generic_point):
            unit = segment_bundle(octagon, octagon.base_lift, target)
            # Halving hyperboloid coordinates maps curvature -1 to -4
            scaled = segment_bundle(steep, steep.base_lift, 0.5 * np.asarray(target))
            assert scaled.order == unit.order
            assert scaled.distance == pytest.approx(0.5 * unit.distance, abs=1e-9)

    def test_sep_tol_reaches_the_enumerator(self, octagon, monkeypatch):
        seen = []
        enumerate_orbit = quotient_metric.orbit

        def recording_orbit(*args, **kwargs):
            seen.append(kwargs["sep_tol"])
            return enumerate_orbit(*args, **kwargs)

        monkeypatch.setattr(quotient_metric, "orbit", recording_orbit)
        target = lift_spatial(octagon.model, [0.4, -0.3])
        segment_bundle(octagon, octagon.base_lift, target, sep_tol=1e-8)
        quotient_distance(octagon, octagon.base_lift, target, sep_tol=1e-9)
        assert seen[0] == 1e-8
        assert seen[-1] == 1e-9


class TestMetricAxioms:

    def test_torus(self, generic, rng):
        for _ in range(20):
            p, q, r = rng.uniform(-2.0, 2.0, (3, 2))
            pq = quotient_distance(generic, p, q)
            assert pq == pytest.approx(quotient_distance(generic, q, p), abs=1e-12)
            assert quotient_distance(generic, p, r) <= pq + quotient_distance(generic, q, r) + 1e-12

    def test_surface(self, octagon, rng):
        for _ in range(3):
            p, q, r = (lift_spatial(octagon.model, rng.uniform(-1.5, 1.5, 2)) for _ in range(3))
            pq = quotient_distance(octagon, p, q)
            assert pq == pytest.approx(quotient_distance(octagon, q, p), abs=1e-9)
            assert quotient_distance(octagon, p, r) <= pq + quotient_distance(octagon, q, r) + 1e-9

    def test_lift_distances_are_convex_along_geodesics(self, octagon, rng):
        model = octagon.model
        p1, q1, p2, q2 = (lift_spatial(model, rng.uniform(-0.8, 0.8, 2)) for _ in range(4))
        h = 1e-3
        ts = np.linspace(h, 1.0 - h, 25)
        for lift in orbit(octagon, p1, 2.0 * octagon.circumradius, lift=p2)[:6]:
            g = lift.element

            def f(t, g=g):
                return distance(model, interpolate(model, p1, q1, t), apply(g, interpolate(model, p2, q2, t), model))

            for t in ts:
                assert f(t - h) - 2.0 * f(t) + f(t + h) >= -1e-10


# =============================================================================
# Envelope
# =============================================================================

class TestDistanceEnvelope:

    def test_matches_quotient_distance_near_anchor(self, octagon, rng):
        p1 = lift_spatial(octagon.model, [0.2, 0.1])
        p2 = lift_spatial(octagon.model, [-0.7, 1.1])
        env = DistanceEnvelope.around(octagon, p1, p2, margin=octagon.circumradius)
        assert env.value == pytest.approx(quotient_distance(octagon, p1, p2))
        for _ in range(5):
            a = lift_spatial(octagon.model, np.array([0.2, 0.1]) + rng.uniform(-0.05, 0.05, 2))
            b = lift_spatial(octagon.model, np.array([-0.7, 1.1]) + rng.uniform(-0.05, 0.05, 2))
            assert env.covers(a, b)
            assert env.evaluate(a, b)[0] == pytest.approx(quotient_distance(octagon, a, b), abs=1e-10)

    def test_rejects_nonpositive_margin(self, square):
        with pytest.raises(GeometryError):
            DistanceEnvelope.around(square, [0.0, 0.0], [0.5, 0.5], margin=0.0)

    def test_covers_shrinks_with_reach(self, square):
        env = DistanceEnvelope.around(square, [0.0, 0.0], [0.5, 0.5], margin=1.0)
        assert env.covers([0.0, 0.0], [0.5, 0.5])
        assert not env.covers([0.0, 0.0], [0.5, 0.5], reach=env.validity_radius + 0.01)


# =============================================================================
# Local maxima
# =============================================================================

class TestPatternSearch:

    @pytest.mark.parametrize("basis, order", [
        (square_basis(), 4),
        (hexagonal_basis(), 3),
        (generic_basis(), 3),
    ])
    def test_farthest_point_on_tori(self, basis, order):
        space = lattice_group(basis)
        seeds = [q for _, q in default_seeds(space, 4, seed=1)]
        far = find_farthest_point(space, [0.0, 0.0], seeds, seed=1)
        assert far.kind is MaxKind.POINTED_MAX
        assert far.final_step < SearchSettings().step_floor
        assert segment_bundle(space, [0.0, 0.0], far.p2).order == order

    def test_square_farthest_point_is_deep_hole(self, square):
        far = find_farthest_point(square, [0.0, 0.0], [[0.3, 0.6]])
        reduced, _ = reduce_to_domain(square, far.p2)
        np.testing.assert_allclose(reduced, [0.5, 0.5], atol=1e-6)
        assert far.value == pytest.approx(math.sqrt(0.5), abs=1e-7)

    def test_search_is_deterministic(self, generic):
        seeds = default_seeds(generic, 3, seed=7)
        a = find_max_pair(generic, seeds, seed=7, max_workers=1)
        b = find_max_pair(generic, seeds, seed=7, max_workers=3)
        np.testing.assert_array_equal(a.p1, b.p1)
        np.testing.assert_array_equal(a.p2, b.p2)
        assert a.value == b.value and a.seed_index == b.seed_index

    def test_iteration_budget(self, octagon):
        seeds = default_seeds(octagon, 1)
        with pytest.raises(ConvergenceError) as err:
            find_max_pair(octagon, seeds, SearchSettings(max_iterations=3))
        assert err.value.best is not None
        assert err.value.best.iterations == 3

    def test_bad_settings(self):
        with pytest.raises(GeometryError):
            SearchSettings(shrink=1.5)
        with pytest.raises(GeometryError):
            SearchSettings(sep_tol=0.0)

    def test_pair_max_on_square_torus(self, square):
        pair = find_max_pair(square, [([0.1, 0.1], [0.4, 0.6])])
        assert pair.kind is MaxKind.PAIR_MAX
        assert pair.value == pytest.approx(math.sqrt(0.5), abs=1e-7)

    def test_seed_at_a_maximum_is_returned_unchanged(self, square):
        pair = find_max_pair(square, [([0.0, 0.0], [0.5, 0.5])])
        np.testing.assert_array_equal(pair.p1, [0.0, 0.0])
        np.testing.assert_array_equal(pair.p2, [0.5, 0.5])
        assert pair.value == pytest.approx(math.sqrt(0.5), abs=1e-12)

    def test_pair_max_search_on_surface_finishes(self, octagon):
        pair = find_max_pair(octagon, default_seeds(octagon, 1), seed=0, max_workers=1)
        assert pair.final_step < SearchSettings().step_floor
        assert 0.0 < pair.value <= 2.0 * octagon.circumradius + 1e-9

    def test_default_seeds_are_reproducible(self, octagon):
        a = default_seeds(octagon, 3, seed=5)
        b = default_seeds(octagon, 3, seed=5)
        for (p, q), (r, s) in zip(a, b):
            np.testing.assert_array_equal(p, r)
            np.testing.assert_array_equal(q, s)
        with pytest.raises(GeometryError):
            default_seeds(octagon, 0)

    @pytest.mark.slow
    def test_pointed_max_on_surface(self, octagon):
        seeds = [q for _, q in default_seeds(octagon, 2, seed=3)]
        far = find_farthest_point(octagon, octagon.base_lift, seeds, seed=3)
        bundle = segment_bundle(octagon, octagon.base_lift, far.p2)
        assert bundle.order >= 3

    @pytest.mark.slow
    def test_pair_max_on_surface(self, octagon):
        pair = find_max_pair(octagon, default_seeds(octagon, 4), seed=0)
        bundle = segment_bundle(octagon, pair.p1, pair.p2, min_tol=relative_min_tol(1e-7))
        assert bundle.order >= 5
        assert pair.final_step < 1e-8
        certificate = strict_max_probe(octagon, pair, 1e-3)
        assert certificate.margin > 0.0


class TestStrictMaxProbe:

    def test_square_deep_hole_is_strict(self, square):
        far = find_farthest_point(square, [0.0, 0.0], [[0.45, 0.55]])
        cert = strict_max_probe(square, far, 1e-3, n_dirs=32)
        assert cert.margin > 0.0
        assert cert.radius_ok
        assert cert.n_dirs == 32

    def test_explicit_directions(self, square):
        far = find_farthest_point(square, [0.0, 0.0], [[0.45, 0.55]])
        cert = strict_max_probe(square, far, 1e-3, directions=[[1.0, 0.0], [0.0, -1.0]])
        assert cert.n_dirs == 2
        assert cert.margin > 0.0
        with pytest.raises(GeometryError):
            strict_max_probe(square, far, 1e-3, directions=[[1.0, 0.0, 0.0]])

    def test_zero_radius(self, square):
        far = find_farthest_point(square, [0.0, 0.0], [[0.45, 0.55]])
        assert strict_max_probe(square, far, 0.0).margin == 0.0

    def test_negative_radius(self, square):
        far = find_farthest_point(square, [0.0, 0.0], [[0.45, 0.55]])
        with pytest.raises(GeometryError):
            strict_max_probe(square, far, -1e-3)

    def test_large_radius_warns(self, square):
        far = find_farthest_point(square, [0.0, 0.0], [[0.45, 0.55]])
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cert = strict_max_probe(square, far, 0.3)
        assert not cert.radius_ok
        assert any(issubclass(w.category, GeolabWarning) for w in caught)

    def test_octagon_vertex_is_strict(self, octagon, vertex):
        bundle = segment_bundle(octagon, octagon.base_lift, vertex)
        pair = MaxPair(octagon.base_lift, vertex, bundle.distance, MaxKind.POINTED_MAX)
        cert = strict_max_probe(octagon, pair, 1e-3, n_dirs=16)
        assert cert.radius_ok
        assert cert.margin > 0.0

    def test_torus_pair_max_is_flat_along_the_diagonal(self, square):
        # Moving both points by the same vector keeps their distance
        pair = MaxPair(np.array([0.0, 0.0]), np.array([0.5, 0.5]), math.sqrt(0.5), MaxKind.PAIR_MAX)
        cert = strict_max_probe(square, pair, 1e-3, directions=[[1.0, 0.0, 1.0, 0.0], [0.3, -0.7, 0.3, -0.7]])
        assert cert.margin == pytest.approx(0.0, abs=1e-12)
        assert cert.radius_ok

    def test_deep_hole_tie_set(self, square):
        # The four nearest lifts of the deep hole are the whole tie set
        lifts = lattice_orbit(square.basis, [0.0, 0.0], 1.0, lift=[0.5, 0.5])
        assert len(lifts) == 4
