"""The suite oracles are themselves checked against a general-purpose conic solver."""
import numpy as np
import pytest

from convexcert import oracles
from convexcert.geometry import Polytope, project

cp = pytest.importorskip("cvxpy")


def cvx_distance_sq(VK, VC):
    a = cp.Variable(len(VC), nonneg=True)
    b = cp.Variable(len(VK), nonneg=True)
    prob = cp.Problem(cp.Minimize(cp.sum_squares(VC.T @ a - VK.T @ b)), [cp.sum(a) == 1, cp.sum(b) == 1])
    prob.solve(solver=cp.CLARABEL)
    return prob.value


def test_distance_oracle_vs_cvxpy():
    rng = np.random.default_rng(0)
    for _ in range(15):
        d = int(rng.integers(1, 5))
        VK = rng.normal(size=(int(rng.integers(1, 7)), d))
        VC = rng.normal(size=(int(rng.integers(1, 7)), d)) + 2.0
        assert oracles.polytope_distance_sq(VK, VC) == pytest.approx(cvx_distance_sq(VK, VC), abs=1e-6)


def test_quadratic_oracle_vs_cvxpy():
    rng = np.random.default_rng(1)
    for _ in range(10):
        d = int(rng.integers(1, 5))
        L = rng.normal(size=(d, d))
        Q = L @ L.T + 0.2 * np.eye(d)
        c = rng.normal(size=d)
        V = rng.normal(size=(d + 3, d))
        w = cp.Variable(len(V), nonneg=True)
        x = V.T @ w
        prob = cp.Problem(cp.Minimize(0.5 * cp.quad_form(x, cp.psd_wrap(Q)) + c @ x), [cp.sum(w) == 1])
        prob.solve(solver=cp.CLARABEL)
        ours = oracles.quadratic_min(Q, c, V)
        f = lambda z: 0.5 * z @ Q @ z + c @ z
        assert f(ours) <= prob.value + 1e-7


def test_projection_three_ways():
    rng = np.random.default_rng(2)
    for _ in range(15):
        V = rng.normal(size=(8, 3))
        x = rng.normal(size=3) * 3
        a = oracles.project_point(V, x)
        b = project(Polytope(V), x).point
        w = cp.Variable(8, nonneg=True)
        cp.Problem(cp.Minimize(cp.sum_squares(V.T @ w - x)), [cp.sum(w) == 1]).solve(solver=cp.CLARABEL)
        assert np.allclose(a, b, atol=1e-10)
        assert np.allclose(a, V.T @ w.value, atol=1e-6)


def test_game_value_oracle():
    assert oracles.game_value([[3.0, 0.0], [0.0, 1.0]]) == pytest.approx(0.75, abs=1e-9)
    assert oracles.game_value([[2.0]]) == pytest.approx(2.0)


def test_stationary_distribution_oracle():
    T = np.array([[0.9, 0.1], [0.5, 0.5]])
    pi = oracles.stationary_distribution(T)
    assert np.allclose(pi @ T, pi) and pi.sum() == pytest.approx(1.0)
