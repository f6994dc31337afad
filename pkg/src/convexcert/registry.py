"""Named bifunctions and functionals selectable from JSON.

Each builder takes the domain polytopes plus a ``params`` dict and returns a
fully tagged instance with a vectorized evaluator.
"""
import numpy as np

from .alternatives import BifunctionInstance


def _psd(M, tol=1e-12):
    if M.size == 0:
        return True
    return bool(np.linalg.eigvalsh(0.5 * (M + M.T)).min() >= -tol)


def bilinear(X, Y, matrix):
    M = np.atleast_2d(np.asarray(matrix, dtype=float))
    return BifunctionInstance(
        X, Y,
        func=lambda x, y: x @ M @ y,
        tags={"affine_in_x", "affine_in_y"},
        batch=lambda xs, ys: xs @ M @ ys.T,
        bilinear_matrix=M,
        name="bilinear",
    )


def quadratic(X, Y, P=None, Q=None, B=None, p=None, q=None, c=0.0):
    """``0.5 x'Px + x'By + 0.5 y'Qy + p'x + q'y + c``; tags follow the definiteness of P and Q."""
    n, m = X.dim, Y.dim
    P = np.zeros((n, n)) if P is None else np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.zeros((m, m)) if Q is None else np.atleast_2d(np.asarray(Q, dtype=float))
    B = np.zeros((n, m)) if B is None else np.atleast_2d(np.asarray(B, dtype=float))
    p = np.zeros(n) if p is None else np.asarray(p, dtype=float)
    q = np.zeros(m) if q is None else np.asarray(q, dtype=float)
    c = float(c)
    tags = {"continuous"}
    if _psd(P):
        tags.add("quasiconvex_in_x")
    if _psd(-P):
        tags.add("quasiconcave_in_x")
    if _psd(Q):
        tags.add("quasiconvex_in_y")
    if _psd(-Q):
        tags.add("quasiconcave_in_y")

    def batch(xs, ys):
        fx = 0.5 * np.einsum("ij,jk,ik->i", xs, P, xs) + xs @ p
        fy = 0.5 * np.einsum("ij,jk,ik->i", ys, Q, ys) + ys @ q
        return fx[:, None] + xs @ B @ ys.T + fy[None, :] + c

    return BifunctionInstance(
        X, Y,
        func=lambda x, y: batch(x[None, :], y[None, :])[0, 0],
        tags=tags,
        batch=batch,
        name="quadratic",
    )


def shifted_norm(X, Y, a=None, b=None, shift=0.0):
    """``|x - a| - |y - b| + shift``: convex in x, concave in y."""
    a = np.zeros(X.dim) if a is None else np.asarray(a, dtype=float)
    b = np.zeros(Y.dim) if b is None else np.asarray(b, dtype=float)
    shift = float(shift)

    def batch(xs, ys):
        return np.linalg.norm(xs - a, axis=1)[:, None] - np.linalg.norm(ys - b, axis=1)[None, :] + shift

    return BifunctionInstance(
        X, Y,
        func=lambda x, y: np.linalg.norm(x - a) - np.linalg.norm(y - b) + shift,
        tags={"continuous", "quasiconvex_in_x", "quasiconcave_in_y"},
        batch=batch,
        name="shifted-norm",
    )


BIFUNCTIONS = {
    "bilinear": bilinear,
    "quadratic": quadratic,
    "shifted-norm": shifted_norm,
}


def make_bifunction(name, X, Y, params=None):
    try:
        builder = BIFUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown bifunction {name!r}; choose from {sorted(BIFUNCTIONS)}") from None
    return builder(X, Y, **(params or {}))


class Functional:
    """Named single-argument functional with a quasiconvexity declaration."""

    def __init__(self, name, func, quasiconvex, radius=None):
        self.name = name
        self.func = func
        self.quasiconvex = quasiconvex
        self.radius = radius

    def __call__(self, x):
        return float(self.func(np.asarray(x, dtype=float)))


def quadratic_functional(Q, c=None, const=0.0):
    """``0.5 x'Qx + c'x + const``."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    c = np.zeros(len(Q)) if c is None else np.asarray(c, dtype=float)
    radius = None
    lo = float(np.linalg.eigvalsh(0.5 * (Q + Q.T)).min())
    if lo > 0:
        # phi(x) <= level forces |x| <= (|c| + sqrt(|c|^2 + 2 lo (level - const))) / lo
        cn = float(np.linalg.norm(c))
        radius = lambda level: (cn + np.sqrt(cn * cn + 2 * lo * max(0.0, level - const))) / lo
    return Functional("quadratic", lambda x: 0.5 * x @ Q @ x + c @ x + const, _psd(Q), radius)


def sqrt_norm_functional(a=None):
    shift = None if a is None else np.asarray(a, dtype=float)

    def f(x):
        return np.sqrt(np.linalg.norm(x if shift is None else x - shift))

    base = 0.0 if shift is None else float(np.linalg.norm(shift))
    return Functional("sqrt-norm", f, True, lambda level: base + level * level)


def norm_functional(a=None):
    shift = None if a is None else np.asarray(a, dtype=float)
    base = 0.0 if shift is None else float(np.linalg.norm(shift))
    return Functional(
        "norm", lambda x: np.linalg.norm(x if shift is None else x - shift), True, lambda level: base + level
    )


FUNCTIONALS = {
    "quadratic": quadratic_functional,
    "sqrt-norm": sqrt_norm_functional,
    "norm": norm_functional,
}


def make_functional(name, params=None):
    try:
        builder = FUNCTIONALS[name]
    except KeyError:
        raise ValueError(f"unknown functional {name!r}; choose from {sorted(FUNCTIONALS)}") from None
    return builder(**(params or {}))
