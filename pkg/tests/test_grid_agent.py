import gc
import itertools
import weakref
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from data_models import AlgebraName, GridFamily, GridPoint, Region
from agents.grid_agent import GridAgent
from lie_library import grid_count

PAIRS = [(a, f) for a in AlgebraName for f in GridFamily]


@pytest.mark.parametrize("algebra, family, M, expected", [
    ("B3", "s", 10, 55),
    ("C3", "l", 10, 55),
    ("C3", "s", 2, 0),
    ("B3", "l", 4, 1),
    ("B3", "l", 8, 14),
    ("C3", "s", 8, 14),
])
def test_grid_sizes(grid_agent, algebra, family, M, expected):
    assert grid_agent.grid_barycentric(algebra, family, M).shape == (expected, 4)
    assert grid_agent.weight_barycentric(algebra, family, M).shape == (expected, 4)
    assert len(grid_agent.enumerate_grid(algebra, family, M)) == expected


@pytest.mark.parametrize("algebra, family", PAIRS)
def test_counts_match_closed_form(grid_agent, algebra, family):
    for M in range(1, 31):
        expected = grid_count(algebra, family, M)
        assert grid_agent.grid_barycentric(algebra, family, M).shape[0] == expected
        assert grid_agent.weight_barycentric(algebra, family, M).shape[0] == expected


@pytest.mark.parametrize("algebra, family", PAIRS)
def test_canonical_order_is_lexicographic(grid_agent, algebra, family):
    rows = [tuple(r) for r in grid_agent.grid_barycentric(algebra, family, 12)[:, 1:].tolist()]
    assert rows == sorted(rows)
    assert len(set(rows)) == len(rows)


def test_empty_grid_has_three_columns(grid_agent):
    assert grid_agent.grid_numerators("C3", "s", 2).shape == (0, 3)
    assert grid_agent.weight_coords("C3", "s", 2).shape == (0, 3)


def test_zero_modulus_rejected(grid_agent):
    with pytest.raises(ValueError):
        grid_agent.grid_barycentric("B3", "s", 0)


@pytest.mark.parametrize("algebra, family", PAIRS)
def test_enumeration_matches_folded_torus(grid_agent, algebra, family):
    for M in range(1, 5):
        enumerated = {tuple(r) for r in grid_agent.grid_barycentric(algebra, family, M).tolist()}
        assert grid_agent.brute_force_grid(algebra, family, M) == enumerated


@pytest.mark.parametrize("algebra, family", PAIRS)
def test_grid_points_lie_in_their_region(grid_agent, algebra, family):
    region = grid_agent.region_for(family)
    for x in grid_agent.grid_orthonormal(algebra, family, 9):
        assert grid_agent.domain_membership(algebra, Region.F, x)
        assert grid_agent.domain_membership(algebra, region, x)


@pytest.mark.parametrize("algebra, family", PAIRS)
def test_weights_lie_in_the_dual_region(grid_agent, lie_core, algebra, family):
    M = 9
    region = grid_agent.region_for(family, dual=True)
    for lam in lie_core.weight_to_orthonormal(algebra, grid_agent.weight_coords(algebra, family, M)):
        assert grid_agent.domain_membership(algebra, region, lam / M)


def test_origin_is_on_the_short_wall_of_B3(grid_agent):
    origin = np.zeros(3)
    assert grid_agent.domain_membership("B3", Region.F, origin)
    assert not grid_agent.domain_membership("B3", Region.FL, origin)


def test_grid_point_validation():
    GridPoint(barycentric=(2, 0, 0, 4), modulus=10, algebra="B3", family="s")
    with pytest.raises(ValidationError):
        GridPoint(barycentric=(1, 1, 1, 1), modulus=10, algebra="B3", family="s")
    with pytest.raises(ValidationError):
        GridPoint(barycentric=(10, 0, 0, 0), modulus=10, algebra="B3", family="s")


@pytest.mark.parametrize("algebra", list(AlgebraName))
def test_reduction_returns_an_affine_weyl_image(grid_agent, lie_core, algebra):
    rng = np.random.default_rng(11)
    group = lie_core.group(algebra)
    for _ in range(50):
        point = rng.uniform(-4.0, 4.0, 3)
        reduced, transform = grid_agent.reduce_alphavee(algebra, point)
        np.testing.assert_allclose(transform.apply(point), reduced, atol=1e-12)
        assert np.all(group.alphavee == transform.linear, axis=(1, 2)).any()
        assert np.array_equal(transform.shift, np.rint(transform.shift))
        bary = grid_agent.barycentric_coordinates(algebra, reduced)
        assert np.all(bary >= -1e-12)


def test_exact_reduction(grid_agent, lie_core):
    point = [Fraction(7, 3), Fraction(-5, 4), Fraction(1, 6)]
    reduced, transform = grid_agent.reduce_alphavee("C3", point, exact=True)
    assert all(isinstance(v, Fraction) for v in reduced)
    y = lie_core.arrays("C3").cartan.astype(object) @ reduced
    assert all(v >= 0 for v in y)
    assert sum(m * v for m, v in zip((2, 2, 1), y)) <= 1
    assert list(transform.apply(np.array(point, dtype=object))) == list(reduced)


def test_reduce_to_domain_keeps_points_of_F(grid_agent):
    x = grid_agent.grid_orthonormal("B3", "l", 8)[3]
    folded, transform = grid_agent.reduce_to_domain("B3", x)
    np.testing.assert_allclose(folded, x, atol=1e-12)
    assert transform.is_identity


def _closed_F_points(lie_core, algebra, M=4):
    """Exact alpha-vee points (1/M)P-vee in closed F: vertices, edges, walls and interior."""
    arrays = lie_core.arrays(algebra)
    points = []
    for u in itertools.product(range(M + 1), repeat=3):
        if int(np.dot(arrays.marks, u)) > M:
            continue
        q = arrays.cartan_inverse_2 @ np.array(u)
        points.append([Fraction(int(v), 2 * M) for v in q])
    return points


@pytest.mark.parametrize("algebra", list(AlgebraName))
@pytest.mark.parametrize("element", range(48))
def test_reduction_undoes_every_weyl_element(grid_agent, lie_core, algebra, element):
    matrix = lie_core.group(algebra).alphavee[element].astype(object)
    for x in _closed_F_points(lie_core, algebra):
        reduced, _ = grid_agent.reduce_alphavee(algebra, list(matrix @ np.array(x, dtype=object)), exact=True)
        assert list(reduced) == x


@pytest.mark.parametrize("algebra", list(AlgebraName))
@pytest.mark.parametrize("shift", [(1, 0, 0), (0, -2, 1), (3, 1, -4), (-1, -1, -1)])
def test_reduction_undoes_coroot_shifts(grid_agent, lie_core, algebra, shift):
    for x in _closed_F_points(lie_core, algebra):
        reduced, _ = grid_agent.reduce_alphavee(algebra, [v + s for v, s in zip(x, shift)], exact=True)
        assert list(reduced) == x


@pytest.mark.parametrize("algebra", list(AlgebraName))
def test_reduce_to_domain_is_canonical_on_walls(grid_agent, lie_core, algebra):
    group = lie_core.group(algebra)
    for x in _closed_F_points(lie_core, algebra):
        p = np.array(x, dtype=float)
        expected = lie_core.point_to_orthonormal(algebra, p)
        for element in (1, 7, 23, 47):
            image = group.alphavee[element] @ p + np.array([2, -1, 1])
            folded, _ = grid_agent.reduce_to_domain(algebra, lie_core.point_to_orthonormal(algebra, image))
            np.testing.assert_allclose(folded, expected, atol=1e-9)


def test_enumeration_cache_is_shared_between_agents(lie_core):
    first = GridAgent(lie_core).grid_barycentric("C3", "l", 9)
    assert GridAgent(lie_core).grid_barycentric(AlgebraName.C3, GridFamily.LONG, 9) is first
    assert not first.flags.writeable


def test_agents_are_not_kept_alive_by_the_cache(lie_core):
    agent = GridAgent(lie_core)
    agent.grid_barycentric("B3", "s", 7)
    agent.weight_barycentric("B3", "s", 7)
    ref = weakref.ref(agent)
    del agent
    gc.collect()
    assert ref() is None


@pytest.mark.parametrize("algebra", list(AlgebraName))
def test_samples_lie_in_F(grid_agent, lie_core, algebra):
    rng = np.random.default_rng(5)
    samples = grid_agent.sample_domain(algebra, 500, rng)
    bary = grid_agent.barycentric_coordinates(algebra, samples)
    assert np.all(bary >= -1e-12)
    np.testing.assert_allclose(bary.sum(axis=1) + (bary[:, 1:] @ (lie_core.arrays(algebra).marks - 1)), 1.0)


@pytest.mark.parametrize("algebra, family", PAIRS)
def test_boundary_points_sit_on_a_family_wall(grid_agent, algebra, family):
    from lie_library import POINT_STRICT_INDICES
    rng = np.random.default_rng(2)
    walls = POINT_STRICT_INDICES[(algebra, family)]
    for _ in range(20):
        bary = grid_agent.barycentric_coordinates(algebra, grid_agent.boundary_point(algebra, family, rng))
        assert np.all(bary >= -1e-12)
        assert min(abs(bary[i]) for i in walls) < 1e-12


def test_tables_have_coordinate_columns(grid_agent):
    table = grid_agent.grid_table("B3", "s", 10)
    assert table["columns"] == ["u0", "u1", "u2", "u3", "x1", "x2", "x3"]
    assert len(table["rows"]) == 55
    weights = grid_agent.weight_table("B3", "s", 10)
    assert weights["columns"][:4] == ["t0", "t1", "t2", "t3"]
