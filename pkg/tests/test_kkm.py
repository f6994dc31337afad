import numpy as np
import pytest

from convexcert import generators as gen
from convexcert.errors import BudgetExceeded, CoverGap, InfeasibleIntersection
from convexcert.geometry import Polytope, contains
from convexcert.kkm import (
    MAX_DOMAIN, FiniteKKMMap, build_selection, intersection_residual, kkm_intersection, verify_kkm,
)


def shrunk_barycentric(level):
    E = np.eye(3)
    base = gen.barycentric_kkm_map()
    a = 1.0 - level
    first = Polytope([E[0], level * E[0] + a * E[1], level * E[0] + a * E[2]])
    return FiniteKKMMap(base.domain_points, [first, *base.values[1:]], base.ambient)


@pytest.mark.parametrize("resolution", [1 / 4, 1 / 16, 1 / 30])
def test_barycentric_cover_certified(resolution):
    assert verify_kkm(gen.barycentric_kkm_map(), resolution).certified


def test_barycentric_intersection():
    x = kkm_intersection(gen.barycentric_kkm_map())
    assert np.allclose(x, 1 / 3, atol=1e-6)


def test_shrunk_cover_violation():
    cert = verify_kkm(shrunk_barycentric(0.9))
    assert not cert.certified
    subset, point = cert.violation
    kmap = shrunk_barycentric(0.9)
    assert not any(contains(kmap.values[i], point) for i in subset)


def test_shrunk_cover_infeasible_certificate():
    with pytest.raises(InfeasibleIntersection) as info:
        kkm_intersection(shrunk_barycentric(0.9))
    assert info.value.details["certificate"] > 0


def test_single_point_map():
    x1 = np.array([0.2, 0.7])
    kmap = FiniteKKMMap(x1[None, :], [Polytope([x1, x1 + 1])], Polytope([x1, x1 + 1]))
    assert verify_kkm(kmap).certified
    assert np.allclose(kkm_intersection(kmap), x1)


@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_star_maps(dim):
    for k in range(5):
        kmap, z = gen.star_kkm_map(np.random.default_rng([dim, k]), dim)
        assert all(contains(v, z) for v in kmap.values)
        assert verify_kkm(kmap).certified
        x = kkm_intersection(kmap)
        assert intersection_residual(kmap, x) <= 1e-7


def test_domain_budget():
    pts = np.zeros((MAX_DOMAIN + 1, 1))
    P = Polytope([[0.0]])
    with pytest.raises(BudgetExceeded):
        verify_kkm(FiniteKKMMap(pts, [P] * len(pts), P))


def test_selection_single_ball_constant():
    K = Polytope([[0.0], [1.0]])
    sel = build_selection([[7.0]], [([0.5], 2.0)], K)
    for x in np.linspace(0, 1, 11):
        assert sel([x]) == pytest.approx([7.0])


def test_selection_symmetric_pair():
    K = Polytope([[0.0], [1.0]])
    sel = build_selection([[0.0], [1.0]], [([0.0], 0.7), ([1.0], 0.7)], K)
    assert sel([0.5])[0] == pytest.approx(0.5)
    xs = np.linspace(0, 1, 1001)[:, None]
    s = sel.evaluate_many(xs)[:, 0]
    assert s.min() >= 0 and s.max() <= 1
    # numerical Lipschitz estimate on the 1e-3 grid; the exact constant is 2.5
    lip = np.max(np.abs(np.diff(s)) / 1e-3)
    assert lip <= 2.5 + 1e-9


def test_selection_weights_are_coordinates():
    K = Polytope([[0.0], [1.0]])
    sel = build_selection([[0.0], [1.0]], [([0.0], 0.7), ([1.0], 0.7)], K)
    coords, point = sel.evaluate([0.2])
    assert coords.is_valid()
    assert coords.weights[1] == 0.0


def test_selection_cover_gap():
    K = Polytope([[0.0], [1.0]])
    with pytest.raises(CoverGap):
        build_selection([[0.0], [1.0]], [([0.0], 0.3), ([1.0], 0.3)], K)


def test_selection_random_covers():
    for k in range(10):
        rng = np.random.default_rng(k)
        pts, balls, K = gen.ball_cover(rng, 2)
        sel = build_selection(pts, balls, K)
        G = rng.dirichlet(np.ones(K.n_vertices), 200) @ K.vertices
        W = sel.weights(G)
        dist = np.linalg.norm(G[:, None] - sel.centers[None], axis=2)
        assert not np.any((W > 0) & (dist >= sel.radii))
        assert np.allclose(W.sum(axis=1), 1)
