"""Reference solvers that share no code with the certified routines.

They back the verification suites: a least-squares solver over products of
simplices (Lawson-Hanson NNLS to find the support, then an exact KKT solve on
it), a game-value LP in the classical positive-matrix form solved by an
interior-point method, and an eigenvector oracle for stochastic matrices.
"""
import numpy as np
from scipy.optimize import linprog, nnls


def simplex_lsq(M, t, blocks, penalty=1e4, refine=20):
    """Minimize ``|M w - t|^2`` over ``w >= 0`` with each block of ``w`` summing to 1.

    ``blocks`` lists the block lengths. Returns ``(w, value)``.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    t = np.asarray(t, dtype=float)
    n = M.shape[1]
    E = np.zeros((len(blocks), n))
    start = 0
    for r, size in enumerate(blocks):
        E[r, start:start + size] = 1.0
        start += size
    if start != n:
        raise ValueError("block sizes must add up to the number of columns")
    scale = penalty * max(1.0, float(np.abs(M).max()))
    w, _ = nnls(np.vstack([M, scale * E]), np.concatenate([t, scale * np.ones(len(blocks))]), maxiter=50 * n)
    support = w > 1e-12 * max(1.0, w.max())
    for _ in range(refine):
        w = _kkt_on_support(M, t, E, support)
        if np.any(w < -1e-14):
            support &= w > 0
            continue
        # dual check: gradient must not decrease along any inactive coordinate
        g = M.T @ (M @ w - t)
        mu = np.linalg.lstsq(E[:, support].T, -g[support], rcond=None)[0]
        reduced = g + E.T @ mu
        bad = (~support) & (reduced < -1e-12 * max(1.0, np.abs(g).max()))
        if not bad.any():
            break
        support[int(np.argmin(np.where(bad, reduced, np.inf)))] = True
    w = np.clip(w, 0.0, None)
    r = M @ w - t
    return w, float(r @ r)


def _kkt_on_support(M, t, E, support):
    S = np.flatnonzero(support)
    Ms, Es = M[:, S], E[:, S]
    k = len(S)
    p = Es.shape[0]
    K = np.block([[Ms.T @ Ms, Es.T], [Es, np.zeros((p, p))]])
    rhs = np.concatenate([Ms.T @ t, np.ones(p)])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    w = np.zeros(M.shape[1])
    w[S] = sol[:k]
    return w


def polytope_distance_sq(VK, VC):
    """Squared distance between ``conv(VK)`` and ``conv(VC)``."""
    VK = np.atleast_2d(VK)
    VC = np.atleast_2d(VC)
    M = np.hstack([VC.T, -VK.T])
    _, val = simplex_lsq(M, np.zeros(M.shape[0]), [len(VC), len(VK)])
    return val


def project_point(V, x):
    """Euclidean projection of ``x`` onto ``conv(V)``."""
    V = np.atleast_2d(V)
    w, _ = simplex_lsq(V.T, x, [len(V)])
    return w @ V


def quadratic_min(Q, c, V):
    """Minimizer of ``0.5 x'Qx + c'x`` over ``conv(V)`` for positive definite Q."""
    L = np.linalg.cholesky(0.5 * (Q + Q.T))
    # 0.5 |L'x + L^{-1} c|^2 differs from the objective by a constant
    target = -np.linalg.solve(L, c)
    w, _ = simplex_lsq(L.T @ np.atleast_2d(V).T, target, [len(V)])
    return w @ V


def game_value(M):
    """Value of ``max_x min_y x'My`` from the positive-matrix LP (interior point)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    shift = 1.0 - float(M.min())
    P = M + shift
    n, m = P.shape
    # min sum(p) s.t. P'p >= 1, p >= 0; value of P is 1 / sum(p)
    res = linprog(np.ones(n), A_ub=-P.T, b_ub=-np.ones(m), bounds=(0, None), method="highs-ipm",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError("game value LP failed")
    return 1.0 / float(res.x.sum()) - shift


def stationary_distribution(T):
    """Left Perron vector of a row-stochastic matrix, normalized to sum 1."""
    vals, vecs = np.linalg.eig(np.asarray(T, dtype=float).T)
    v = np.real(vecs[:, int(np.argmin(np.abs(vals - 1.0)))])
    return v / v.sum()
