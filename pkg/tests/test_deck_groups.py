import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.errors import BudgetExceededError, GeometryError
from src.geometry.deck_groups import (
    OCTAGON_RELATOR,
    Isometry,
    apply,
    displacement,
    evaluate_word,
    evaluate_word_matrices,
    fiber_gap,
    fuchsian_orbit,
    generic_basis,
    hexagonal_basis,
    injectivity_radius,
    lattice_group,
    lattice_orbit,
    load_quotient_space,
    octagon_group,
    reduce_to_domain,
    save_quotient_space,
    square_basis,
    translation_length,
    word_ball,
)
from src.geometry.model_spaces import ModelSpace, distance, distance_many, lift_spatial

SEP_TOL = 1e-6


@pytest.fixture(scope="module")
def octagon():
    return octagon_group()


def _same_point_sets(space, a, b, tol=SEP_TOL):
    """Every point of a has a partner in b within tol and vice versa."""
    a = np.array(a)
    b = np.array(b)
    if len(a) != len(b):
        return False
    for p in a:
        if np.min(distance_many(space, p, b)) >= tol:
            return False
    return True


# =============================================================================
# Isometries
# =============================================================================

class TestIsometry:

    def test_rejects_non_lorentz_matrix(self):
        with pytest.raises(GeometryError):
            Isometry.matrix(np.diag([1.0, 2.0, 1.0]))

    def test_rejects_sheet_swap(self):
        with pytest.raises(GeometryError):
            Isometry.matrix(np.diag([-1.0, 1.0, 1.0]))

    def test_compose_and_inverse_words(self, octagon):
        a, b = octagon.generators[:2]
        ab = a.compose(b)
        assert ab.word == (1, 2)
        assert ab.inverse().word == (-2, -1)
        np.testing.assert_allclose(ab.compose(ab.inverse()).data, np.eye(3), atol=1e-9)

    def test_translation_compose(self):
        g = Isometry.translation([1.0, 0.0], (1,)).compose(Isometry.translation([0.0, 2.0], (2,)))
        np.testing.assert_array_equal(g.data, [1.0, 2.0])
        np.testing.assert_array_equal(g.inverse().data, [-1.0, -2.0])

    def test_mixed_compose_rejected(self, octagon):
        with pytest.raises(GeometryError):
            octagon.generators[0].compose(Isometry.translation([1.0, 0.0]))

    def test_isometry_preserves_distance(self, octagon):
        space = octagon.model
        p = lift_spatial(space, [0.3, -0.2])
        q = lift_spatial(space, [-1.1, 0.7])
        for g in octagon.generators:
            assert distance(space, apply(g, p, space), apply(g, q, space)) == pytest.approx(distance(space, p, q))


# =============================================================================
# Lattices
# =============================================================================

class TestLattice:

    def test_orbit_of_square_lattice(self):
        pts = lattice_orbit(square_basis(), [0.5, 0.5], 0.75)
        assert len(pts) == 4
        assert all(o.dist_to_center == pytest.approx(math.sqrt(0.5)) for o in pts)

    def test_orbit_is_sorted_and_exhaustive(self):
        b = generic_basis()
        pts = lattice_orbit(b, [0.2, 0.3], 3.0)
        dists = [o.dist_to_center for o in pts]
        assert dists == sorted(dists)
        # Brute force over a generous coefficient box
        m = np.stack(np.meshgrid(np.arange(-10, 11), np.arange(-10, 11)), axis=-1).reshape(-1, 2)
        brute = np.linalg.norm(m @ b - [0.2, 0.3], axis=1)
        assert len(pts) == int(np.sum(brute <= 3.0))

    def test_elements_carry_words(self):
        for o in lattice_orbit(square_basis(), [0.0, 0.0], 2.0):
            rebuilt = sum((np.sign(w) * square_basis()[abs(w) - 1] for w in o.element.word), np.zeros(2))
            np.testing.assert_allclose(rebuilt, o.point, atol=1e-12)

    def test_singular_basis_rejected(self):
        with pytest.raises(GeometryError):
            lattice_group([[1.0, 0.0], [2.0, 0.0]])

    def test_negative_radius_rejected(self):
        with pytest.raises(GeometryError):
            lattice_orbit(square_basis(), [0.0, 0.0], -1.0)

    @pytest.mark.parametrize("basis, shortest", [
        (square_basis(), 1.0),
        (hexagonal_basis(), 1.0),
        (generic_basis(), 1.0),
    ])
    def test_injectivity_floor_is_shortest_vector(self, basis, shortest):
        assert lattice_group(basis).injectivity_floor == pytest.approx(shortest)

    def test_injectivity_radius_of_square_torus(self):
        space = lattice_group(square_basis())
        assert injectivity_radius(space, [0.3, 0.9]) == pytest.approx(0.5)

    @given(st.floats(-20, 20), st.floats(-20, 20))
    def test_reduce_to_domain_lands_in_parallelepiped(self, x, y):
        space = lattice_group(generic_basis())
        reduced, h = reduce_to_domain(space, [x, y])
        coeffs = np.linalg.solve(space.basis.T, reduced)
        assert np.all(coeffs >= -1e-9) and np.all(coeffs < 1.0 + 1e-9)
        np.testing.assert_allclose(apply(h, [x, y]), reduced, atol=1e-12)


# =============================================================================
# Octagon group
# =============================================================================

class TestOctagonGroup:

    def test_relator_is_identity(self, octagon):
        relator = evaluate_word_matrices([g.data for g in octagon.generators], OCTAGON_RELATOR)
        assert np.max(np.abs(relator - np.eye(3))) <= 1e-8

    def test_evaluate_word_matches_relator(self, octagon):
        g = evaluate_word(octagon, OCTAGON_RELATOR)
        np.testing.assert_allclose(g.data, np.eye(3), atol=1e-8)
        assert g.word == OCTAGON_RELATOR

    def test_unknown_letter_rejected(self, octagon):
        with pytest.raises(GeometryError):
            evaluate_word(octagon, (5,))

    def test_generators_are_side_pairings(self, octagon):
        # Each generator moves the centre across one side: twice the inradius
        inradius = math.acosh(1.0 / math.tan(math.pi / 8.0))
        for g in octagon.generators:
            assert displacement(octagon, g, octagon.base_lift) == pytest.approx(2.0 * inradius)
            assert translation_length(g, octagon.model) <= 2.0 * inradius + 1e-9

    def test_circumradius(self, octagon):
        assert octagon.circumradius == pytest.approx(math.acosh(1.0 / math.tan(math.pi / 8.0) ** 2))

    def test_curvature_scales_geometry(self):
        unit = octagon_group(-1.0)
        scaled = octagon_group(-4.0)
        assert scaled.circumradius == pytest.approx(0.5 * unit.circumradius)
        assert scaled.injectivity_floor == pytest.approx(0.5 * unit.injectivity_floor)

    def test_roundtrip_through_json(self, octagon, tmp_path):
        path = tmp_path / "octagon.json"
        save_quotient_space(octagon, path)
        loaded = load_quotient_space(path)
        assert loaded.kind == "fuchsian"
        for a, b in zip(octagon.generators, loaded.generators):
            np.testing.assert_allclose(a.data, b.data)
        assert loaded.injectivity_floor == pytest.approx(octagon.injectivity_floor)

    def test_lattice_json(self, tmp_path):
        space = lattice_group(hexagonal_basis(), name="hexagonal")
        path = tmp_path / "hex.json"
        save_quotient_space(space, path)
        loaded = load_quotient_space(path)
        np.testing.assert_allclose(loaded.basis, space.basis)
        assert loaded.name == "hexagonal"


class TestFuchsianOrbit:

    def test_matches_word_ball(self, octagon):
        radius = 4.6
        pruned = fuchsian_orbit(octagon, octagon.base_lift, radius)
        brute = [o for o in word_ball(octagon, 3) if o.dist_to_center <= radius]
        assert _same_point_sets(octagon.model, [o.point for o in pruned], [o.point for o in brute])

    @pytest.mark.slow
    def test_matches_word_ball_of_length_six(self, octagon):
        radius = 5.5
        pruned = fuchsian_orbit(octagon, octagon.base_lift, radius)
        brute = [o for o in word_ball(octagon, 6) if o.dist_to_center <= radius]
        assert _same_point_sets(octagon.model, [o.point for o in pruned], [o.point for o in brute])

    def test_orbit_words_rebuild_points(self, octagon):
        p = lift_spatial(octagon.model, [0.4, -0.9])
        for o in fuchsian_orbit(octagon, octagon.base_lift, 5.0, lift=p):
            g = evaluate_word(octagon, o.element.word)
            assert distance(octagon.model, apply(g, p, octagon.model), o.point) < 1e-7

    def test_lift_outside_domain(self, octagon):
        far = lift_spatial(octagon.model, [40.0, 15.0])
        pts = fuchsian_orbit(octagon, octagon.base_lift, 3.0, lift=far)
        assert pts
        assert all(o.dist_to_center <= 3.0 for o in pts)
        reduced, _ = reduce_to_domain(octagon, far)
        assert distance(octagon.model, octagon.base_lift, reduced) <= octagon.circumradius + 1e-9

    def test_identity_and_eight_neighbours(self, octagon):
        pts = fuchsian_orbit(octagon, octagon.base_lift, 3.5)
        assert len(pts) == 9
        assert pts[0].dist_to_center == 0.0

    def test_distinct_elements(self, octagon):
        pts = fuchsian_orbit(octagon, octagon.base_lift, 5.0)
        arr = np.array([o.point for o in pts])
        for i, p in enumerate(arr):
            d = distance_many(octagon.model, p, np.delete(arr, i, axis=0))
            assert np.min(d) >= SEP_TOL

    def test_budget_exceeded(self, octagon):
        with pytest.raises(BudgetExceededError) as err:
            fuchsian_orbit(octagon, octagon.base_lift, 8.0, node_budget=50)
        assert err.value.budget == "node_budget"

    def test_negative_radius_rejected(self, octagon):
        with pytest.raises(GeometryError):
            fuchsian_orbit(octagon, octagon.base_lift, -0.1)


class TestFiberGap:

    def test_gap_between_nearest_lifts(self):
        pts = lattice_orbit(square_basis(), [0.1, 0.0], 3.0)
        assert fiber_gap(pts, 1) == pytest.approx(0.8)

    def test_tie_gives_zero(self):
        pts = lattice_orbit(square_basis(), [0.5, 0.5], 3.0)
        assert fiber_gap(pts, 2) == 0.0
        assert fiber_gap(pts, 4) > 0.0

    def test_bad_k(self):
        pts = lattice_orbit(square_basis(), [0.5, 0.5], 1.0)
        with pytest.raises(GeometryError):
            fiber_gap(pts, 0)
        with pytest.raises(GeometryError):
            fiber_gap(pts, len(pts) + 1)

    def test_too_few_points(self):
        pts = lattice_orbit(square_basis(), [0.5, 0.5], 0.8)
        assert fiber_gap(pts, len(pts)) == 0.0

    def test_euclidean_model_of_orbit(self):
        assert lattice_group(square_basis()).model == ModelSpace.euclidean(2)
