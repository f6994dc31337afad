import numpy as np
import pytest

from convexcert.errors import PointInsideSet, SetsIntersect
from convexcert.geometry import Polytope
from convexcert.oracles import polytope_distance_sq
from convexcert.separation import common_point, separate_point, separate_sets

SQUARE = Polytope([[0, 0], [1, 0], [1, 1], [0, 1]])


def test_point_square_face():
    res = separate_point(SQUARE, [2, 0.5])
    assert np.allclose(res.normal, [1, 0], atol=1e-12)
    assert np.allclose(res.witness_projection, [1, 0.5], atol=1e-12)
    assert res.margin == pytest.approx(1.0)
    assert not res.weak


def test_point_single_point_set():
    res = separate_point(Polytope([[0]]), [3])
    assert np.allclose(res.normal, [3])
    assert res.margin == pytest.approx(9.0)


def test_point_inside_raises_with_witness():
    with pytest.raises(PointInsideSet) as info:
        separate_point(SQUARE, [0.5, 0.5])
    assert "witness" in info.value.details


def test_point_supporting_hyperplane():
    rng = np.random.default_rng(5)
    C = Polytope(rng.normal(size=(8, 3)))
    x = np.array([4.0, 0.0, 0.0])
    res = separate_point(C, x)
    assert res.hyperplane.side(x) > 0
    # the hyperplane supports C at the projection, x lies strictly beyond it
    assert np.all(C.vertices @ res.hyperplane.normal <= res.hyperplane.offset + 1e-9)
    assert res.vertex_slack <= 1e-9


def test_sets_squares():
    K = Polytope([[2, 2], [3, 2], [3, 3], [2, 3]])
    res = separate_sets(K, SQUARE)
    assert res.margin == pytest.approx(2.0)
    u = res.normal / np.linalg.norm(res.normal)
    assert abs(abs(u @ np.array([1, 1]) / np.sqrt(2)) - 1) < 1e-9


def test_sets_two_points():
    res = separate_sets(Polytope([[0]]), Polytope([[5]]))
    assert abs(res.normal[0]) == pytest.approx(5.0)
    assert res.margin == pytest.approx(25.0)


def test_sets_identical_raise():
    with pytest.raises(SetsIntersect) as info:
        separate_sets(SQUARE, SQUARE)
    w = np.asarray(info.value.details["witness"])
    assert w.shape == (2,)


def test_common_point_lp():
    assert common_point(SQUARE, Polytope([[1, 1], [2, 2]])) is not None
    assert common_point(SQUARE, Polytope([[3, 3], [4, 4]])) is None


def test_antisymmetric_normals_and_margin_oracle():
    rng = np.random.default_rng(6)
    for _ in range(20):
        K = Polytope(rng.normal(size=(5, 2)))
        C = Polytope(rng.normal(size=(6, 2)) + [6, 1])
        a = separate_sets(K, C)
        b = separate_sets(C, K)
        assert np.allclose(a.normal, -b.normal, atol=1e-8)
        assert a.margin == pytest.approx(polytope_distance_sq(K.vertices, C.vertices), abs=1e-9)
        # sup over C plus margin stays below min over K
        assert np.max(C.vertices @ a.normal) + a.margin <= np.min(K.vertices @ a.normal) + 1e-9
