"""Randomized invariants checked with hypothesis."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from convexcert.fixed_points import AffineMap
from convexcert.geometry import Polytope, contains, contains_many, minkowski_difference, project
from convexcert.separation import separate_point
from convexcert.vi import BilinearForm, LinearFunctional, stampacchia_solve

coords = st.floats(-5, 5, allow_nan=False, allow_infinity=False, width=64)


@st.composite
def polytope_and_points(draw, n_points=2):
    d = draw(st.integers(1, 5))
    m = draw(st.integers(1, 10))
    V = draw(arrays(float, (m, d), elements=coords))
    pts = [draw(arrays(float, d, elements=coords)) for _ in range(n_points)]
    return Polytope(V), pts


SETTINGS = settings(max_examples=150, deadline=None)


@SETTINGS
@given(polytope_and_points())
def test_projection_nonexpansive(data):
    P, (x1, x2) = data
    y1, y2 = project(P, x1).point, project(P, x2).point
    assert np.linalg.norm(y1 - y2) <= np.linalg.norm(x1 - x2) + 1e-9


@SETTINGS
@given(polytope_and_points(1))
def test_projection_variational_inequality(data):
    P, (x,) = data
    y = project(P, x).point
    assert np.max((P.vertices - y) @ (x - y)) <= 1e-9 * max(1.0, np.abs(P.vertices).max() ** 2)


@SETTINGS
@given(polytope_and_points(1))
def test_projection_is_member(data):
    P, (x,) = data
    assert contains(P, project(P, x).point, 1e-8)


@SETTINGS
@given(polytope_and_points(0), polytope_and_points(0), st.integers(0, 2**32 - 1))
def test_minkowski_difference_contains_differences(a, b, seed):
    C, K = a[0], b[0]
    if C.dim != K.dim:
        K = Polytope(np.resize(K.vertices, (K.n_vertices, C.dim)))
    rng = np.random.default_rng(seed)
    c = rng.dirichlet(np.ones(C.n_vertices)) @ C.vertices
    k = rng.dirichlet(np.ones(K.n_vertices)) @ K.vertices
    D = minkowski_difference(C, K)
    assert contains(D, c - k, 1e-8)


@SETTINGS
@given(polytope_and_points(1), st.floats(0.5, 3.0))
def test_separation_chain_for_pushed_point(data, push):
    P, (x,) = data
    c = P.barycenter
    R = float(np.max(np.linalg.norm(P.vertices - c, axis=1)))
    d = x - c
    if np.linalg.norm(d) < 1e-6:
        return
    z = c + (R + push) * d / np.linalg.norm(d)
    res = separate_point(P, z)
    u, y = res.normal, res.witness_projection
    assert np.max(P.vertices @ u) <= u @ y + 1e-9 * max(1.0, R * R)
    assert u @ y < u @ z
    assert abs(res.margin - u @ u) <= 1e-9 * max(1.0, u @ u)


@SETTINGS
@given(polytope_and_points(0), st.integers(0, 2**32 - 1))
def test_contains_many_matches_lp(data, seed):
    P = data[0]
    rng = np.random.default_rng(seed)
    pts = P.barycenter + rng.normal(size=(20, P.dim)) * (np.ptp(P.vertices) + 0.5)
    inner = np.vstack([pts, rng.dirichlet(np.ones(P.n_vertices), 5) @ P.vertices])
    batch = contains_many(P, inner, 1e-9)
    for p, flag in zip(inner, batch):
        # only disagreements beyond a thin boundary layer count
        if flag != contains(P, p, 1e-9):
            assert project(P, p).distance <= 1e-7


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_affine_maps_preserve_convex_combinations(d, seed):
    rng = np.random.default_rng(seed)
    phi = AffineMap(rng.normal(size=(d, d)), rng.normal(size=d))
    pts = rng.normal(size=(5, d))
    lam = rng.dirichlet(np.ones(5))
    assert np.allclose(phi(lam @ pts), lam @ phi.apply_many(pts), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_identity_vi_equals_projection(d, seed):
    rng = np.random.default_rng(seed)
    X = Polytope(rng.normal(size=(d + 3, d)))
    ell = rng.normal(size=d) * 3
    res = stampacchia_solve(BilinearForm(np.eye(d), 1.0, 1.0), LinearFunctional(ell), X)
    assert np.linalg.norm(res.x - project(X, ell).point) <= 1e-8
