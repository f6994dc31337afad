import itertools

import numpy as np
import pytest

from convexcert import generators as gen
from convexcert.errors import BudgetExceeded, DimensionMismatch
from convexcert.geometry import Polytope, contains, contains_many, grid_points
from convexcert.intersection import (
    MAX_FAMILY, check_ghouila_houri, find_common_point, subfamily_table, union_midpoint_search,
)

TRIANGLE_EDGES = [
    Polytope([[0, 0], [1, 0]]),
    Polytope([[1, 0], [0, 1]]),
    Polytope([[0, 1], [0, 0]]),
]


def square(lo, hi):
    return Polytope([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])


def test_overlapping_segments():
    x = find_common_point([Polytope([[0], [2]]), Polytope([[1], [3]])])
    assert 1 - 1e-9 <= x[0] <= 2 + 1e-9


def test_triangle_edges_have_no_common_point():
    assert find_common_point(TRIANGLE_EDGES) is None
    for a, b in itertools.combinations(TRIANGLE_EDGES, 2):
        assert find_common_point([a, b]) is not None


def test_squares_with_common_core():
    fam = [square((0, 0), (2, 2)), square((1, 1), (3, 3)), square((1, 0), (2, 3))]
    x = find_common_point(fam)
    assert np.all(x >= 1 - 1e-9) and np.all(x <= 2 + 1e-9)
    assert all(contains(P, x) for P in fam)


def test_family_validation():
    with pytest.raises(DimensionMismatch):
        find_common_point([Polytope([[0]]), Polytope([[0, 0]])])
    big = [Polytope([[0]])] * (MAX_FAMILY + 1)
    assert find_common_point(big) is not None
    with pytest.raises(BudgetExceeded):
        subfamily_table(big)
    with pytest.raises(BudgetExceeded):
        check_ghouila_houri(big)


def test_subfamily_table_covers_every_proper_subset():
    table = subfamily_table(TRIANGLE_EDGES)
    assert sorted(table) == sorted([(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)])
    assert all(table[s] is not None for s in table)
    assert find_common_point(TRIANGLE_EDGES) is None


def test_triangle_edges_report():
    rep = check_ghouila_houri(TRIANGLE_EDGES)
    assert rep.status == "union_not_convex"
    assert rep.hypothesis_ii and rep.full_intersection is None
    w = rep.union_convexity.counter_witness
    assert contains(Polytope([[0, 0], [1, 0], [0, 1]]), w)
    assert not any(contains(P, w) for P in TRIANGLE_EDGES)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_simplex_faces(n):
    fam = gen.simplex_faces(n)
    assert len(fam) == n + 2
    rep = check_ghouila_houri(fam, 1 / 8)
    table = rep.subfamily_intersections
    assert all(table[s] is not None for s in table if len(s) == n + 1)
    assert rep.full_intersection is None
    assert rep.status == "union_not_convex"
    w = rep.union_convexity.counter_witness
    assert not any(contains(P, w) for P in fam)


def test_translated_squares_pass():
    fam = [square((t, t), (t + 2, t + 2)) for t in (0.0, 0.3, 0.6, 0.9)]
    rep = check_ghouila_houri(fam)
    assert rep.status == "common_point"
    assert all(contains(P, rep.full_intersection) for P in fam)


def test_subfamily_empty_status():
    fam = [Polytope([[0], [1]]), Polytope([[2], [3]]), Polytope([[0], [3]])]
    assert check_ghouila_houri(fam).status == "subfamily_empty"


def test_planted_families_always_intersect():
    for k in range(200):
        rng = np.random.default_rng(k)
        dim = int(rng.integers(1, 4))
        fam, z = gen.klee_positive_family(rng, dim, dim + 1 + int(rng.integers(0, 3)))
        x = find_common_point(fam)
        assert x is not None
        assert all(contains(P, x) for P in fam)


def test_agrees_with_grid_search():
    for k in range(50):
        rng = np.random.default_rng(100 + k)
        dim = int(rng.integers(1, 3))
        fam = [Polytope(rng.normal(size=(dim + 2, dim)) * 0.8 + rng.normal(size=dim) * 0.5) for _ in range(3)]
        G = grid_points(fam[0], 1 / 40)
        inside = np.ones(len(G), dtype=bool)
        for P in fam[1:]:
            inside &= contains_many(P, G, 1e-12)
        x = find_common_point(fam)
        if inside.any():
            assert x is not None
        if x is not None:
            assert all(contains(P, x, 1e-8) for P in fam)


def test_union_search_deterministic():
    a = union_midpoint_search(TRIANGLE_EDGES, 1 / 8, seed=3)
    b = union_midpoint_search(TRIANGLE_EDGES, 1 / 8, seed=3)
    assert np.array_equal(a.counter_witness, b.counter_witness)
    assert a.pairs_checked == b.pairs_checked
