"""Pure-Python/numpy versions of the hot loops in :mod:`convexcert._ckernels`.

Both modules expose the same functions with the same semantics; the compiled
one is preferred at import time (see :mod:`convexcert.kernels`).
"""
import numpy as np


def away_step_fw(G, c, lam, tol, max_iter):
    """Away-step Frank-Wolfe for ``min 0.5 l'Gl - c'l`` over the unit simplex.

    Parameters
    ----------
    G : (m, m) ndarray
        Gram matrix ``V'V`` of the vertex matrix.
    c : (m,) ndarray
        ``V'x`` for the point being projected.
    lam : (m,) ndarray
        Feasible starting weights; not modified.
    tol : float
        Stop once the Frank-Wolfe gap drops to ``tol``.
    max_iter : int

    Returns
    -------
    lam : ndarray
    gap : float
        Final Frank-Wolfe gap ``max_j <x - y, v_j - y>``.
    iterations : int
    """
    G = np.ascontiguousarray(G, dtype=float)
    c = np.asarray(c, dtype=float)
    lam = np.array(lam, dtype=float)
    Gl = G @ lam
    gap = np.inf
    it = 0
    while it < max_iter:
        if it % 64 == 63:
            Gl = G @ lam
        g = Gl - c
        glam = g @ lam
        lGl = lam @ Gl
        s = int(np.argmin(g))
        gap = glam - g[s]
        if gap <= tol:
            break
        active = lam > 0.0
        masked = np.where(active, g, -np.inf)
        a = int(np.argmax(masked))
        gap_away = g[a] - glam
        if gap >= gap_away or lam[a] >= 1.0:
            slope = g[s] - glam
            curv = G[s, s] - 2.0 * Gl[s] + lGl
            gmax = 1.0
            step = gmax if curv <= 0.0 else min(gmax, -slope / curv)
            lam *= 1.0 - step
            lam[s] += step
            Gl = (1.0 - step) * Gl + step * G[:, s]
        else:
            slope = glam - g[a]
            curv = lGl - 2.0 * Gl[a] + G[a, a]
            gmax = lam[a] / (1.0 - lam[a])
            step = gmax if curv <= 0.0 else min(gmax, -slope / curv)
            lam *= 1.0 + step
            lam[a] -= step
            Gl = (1.0 + step) * Gl - step * G[:, a]
            if step >= gmax:
                lam[a] = 0.0
        np.maximum(lam, 0.0, out=lam)
        it += 1
    else:
        g = G @ lam - c
        gap = g @ lam - g.min()
    return lam, float(gap), it


def cesaro_run(A, b, x, n_steps):
    """Iterate ``x <- Ax + b`` ``n_steps`` times.

    Returns the sum of the visited points ``x_0 .. x_{n-1}`` and ``x_n``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.array(x, dtype=float)
    total = np.zeros_like(x)
    for _ in range(n_steps):
        total += x
        x = A @ x + b
    return total, x
