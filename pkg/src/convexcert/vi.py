"""Stampacchia variational inequalities and quasiconvex minimization.

Convention: ``a(x, z) = x' A z``. The inequality solved is
``a(x_bar, x_bar - y) <= l(x_bar) - l(y)`` for all ``y`` in ``X``, i.e. the
monotone VI with operator ``F(x) = A'x - l``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .alternatives import quasiconvexity_violation
from .errors import CoercivityRadiusMissing, NonConvergence, NonpositiveAlpha, QuasiconvexityViolated
from .geometry import DEFAULT_TOL, Polytope, as_vector, grid_points, project


@dataclass(frozen=True)
class BilinearForm:
    matrix: np.ndarray
    continuity_C: float
    coercivity_alpha: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ValueError("bilinear form needs a square matrix")
        object.__setattr__(self, "matrix", A)
        if not self.coercivity_alpha > 0:
            raise NonpositiveAlpha("coercivity constant must be positive")
        if self.continuity_C < np.linalg.norm(A, 2) - 1e-9:
            raise ValueError("continuity constant is below the spectral norm")
        if self.coercivity_alpha > np.linalg.eigvalsh(0.5 * (A + A.T)).min() + 1e-9:
            raise ValueError("coercivity constant exceeds the smallest symmetric eigenvalue")

    @classmethod
    def from_matrix(cls, A):
        """Tightest constants: spectral norm and smallest eigenvalue of the symmetric part."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return cls(A, float(np.linalg.norm(A, 2)), float(np.linalg.eigvalsh(0.5 * (A + A.T)).min()))

    def __call__(self, x, z) -> float:
        return float(np.asarray(x) @ self.matrix @ np.asarray(z))


@dataclass(frozen=True)
class LinearFunctional:
    vector: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vector", as_vector(self.vector))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def __call__(self, x) -> float:
        return float(self.vector @ np.asarray(x))


@dataclass(frozen=True)
class CoercivityBound:
    beta: float
    gamma: float
    M: float


def coercivity_bound(C: float, alpha: float, ell_norm: float, y0_norm: float) -> CoercivityBound:
    """Radius ``M`` such that ``f(x, y0) <= 0`` forces ``|x| <= M``.

    ``beta = (C |y0| + |l|) / alpha``, ``gamma = |l| |y0| / alpha`` and
    ``M = (beta + sqrt(beta^2 + 4 gamma)) / 2``.
    """
    if not alpha > 0:
        raise NonpositiveAlpha("coercivity constant must be positive", alpha=alpha)
    if C < 0 or ell_norm < 0 or y0_norm < 0:
        raise ValueError("C, |l| and |y0| must be nonnegative")
    beta = (C * y0_norm + ell_norm) / alpha
    gamma = ell_norm * y0_norm / alpha
    return CoercivityBound(beta, gamma, 0.5 * (beta + math.sqrt(beta * beta + 4.0 * gamma)))


def vi_residual(a: BilinearForm, ell: LinearFunctional, X: Polytope, x) -> float:
    """``max_y a(x, x - y) - l(x - y)`` over the vertices of X (affine in y, so exact)."""
    x = as_vector(x)
    F = a.matrix.T @ x - ell.vector
    return float(np.max(F @ x - X.vertices @ F))


def vi_gap_function(a: BilinearForm, ell: LinearFunctional, x, y) -> float:
    """The bifunction ``f(x, y) = a(x, x - y) - l(x - y)``."""
    d = np.asarray(x) - np.asarray(y)
    return a(x, d) - ell(d)


@dataclass
class VIResult:
    x: np.ndarray
    residual: float
    iterations: int
    q: float
    rho: float
    history: list = field(default_factory=list)
    uniqueness_gap: Optional[float] = None


def _contract(a, ell, X, x, rho, q, tol, max_iter, record):
    At = a.matrix.T
    # q == 0 means one step lands on the solution
    stop = tol * (1.0 - q) / q if q > 0 else math.inf
    hist = [x.copy()] if record else []
    w = None
    for it in range(1, max_iter + 1):
        p = project(X, x - rho * (At @ x - ell.vector), warm_start=w)
        w = p.weights
        step = float(np.linalg.norm(p.point - x))
        x = p.point
        if record:
            hist.append(x.copy())
        if step <= stop:
            return x, it, hist
    raise NonConvergence(
        "projected contraction hit its iteration budget",
        residual=vi_residual(a, ell, X, x), iterations=max_iter,
    )


def stampacchia_solve(
    a: BilinearForm,
    ell: LinearFunctional,
    X: Polytope,
    tol: float = DEFAULT_TOL,
    x0=None,
    max_iter: int = 100_000,
    record: bool = False,
    check_uniqueness: bool = False,
) -> VIResult:
    """Solve the VI by the projected contraction ``x <- P_X(x - rho (A'x - l))``.

    ``rho = alpha / C^2`` gives the contraction factor
    ``q = sqrt(1 - 2 rho alpha + rho^2 C^2)``; iteration stops once the step is
    below ``tol (1 - q) / q``, which bounds the distance to the solution by
    ``tol``. With ``check_uniqueness`` a second run from the opposite corner of
    the bounding box is compared and the distance stored in ``uniqueness_gap``.
    """
    n = a.matrix.shape[0]
    if X.dim != n or ell.vector.size != n:
        raise ValueError("form, functional and X must share a dimension")
    C, alpha = a.continuity_C, a.coercivity_alpha
    rho = alpha / (C * C)
    q = math.sqrt(max(0.0, 1.0 - 2.0 * rho * alpha + rho * rho * C * C))
    lo, hi = X.vertices.min(axis=0), X.vertices.max(axis=0)
    start = lo if x0 is None else as_vector(x0)
    start = project(X, start).point
    x, it, hist = _contract(a, ell, X, start, rho, q, tol, max_iter, record)
    result = VIResult(x, vi_residual(a, ell, X, x), it, q, rho, hist)
    if check_uniqueness:
        other = project(X, hi).point
        x2, _, _ = _contract(a, ell, X, other, rho, q, tol, max_iter, False)
        result.uniqueness_gap = float(np.linalg.norm(x - x2))
    return result


@dataclass(frozen=True)
class UnboundedDomain:
    """All of R^n, usable only for coercive functionals.

    ``radius(level)`` must bound ``|x|`` on the sublevel set ``{phi <= level}``.
    """

    dim: int
    radius: Optional[Callable[[float], float]] = None
    anchor: Optional[np.ndarray] = None


@dataclass
class MinimizeResult:
    xbar: np.ndarray
    value: float
    domain: Polytope
    evaluations: int


def _validate_quasiconvex(phi, X: Polytope, seed: int, segments: int = 8):
    rng = np.random.default_rng(seed)
    for _ in range(segments):
        a = rng.dirichlet(np.ones(X.n_vertices)) @ X.vertices
        b = rng.dirichlet(np.ones(X.n_vertices)) @ X.vertices
        bad = quasiconvexity_violation(phi, (a, b), 33, 1e-12)
        if bad is not None:
            raise QuasiconvexityViolated("functional is not quasiconvex along a segment", segment=(a, b), ts=bad)


def _truncate(phi, dom: UnboundedDomain) -> Polytope:
    if dom.radius is None:
        raise CoercivityRadiusMissing("an unbounded domain needs a coercivity radius function")
    anchor = np.zeros(dom.dim) if dom.anchor is None else as_vector(dom.anchor)
    R = float(dom.radius(phi(anchor)))
    R = max(R, float(np.linalg.norm(anchor))) * (1.0 + 1e-9) + 1e-12
    corners = np.array(np.meshgrid(*[[-R, R]] * dom.dim)).reshape(dom.dim, -1).T
    return Polytope(corners)


class _Counted:
    def __init__(self, phi):
        self.phi = phi
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return float(self.phi(x))


def _segment_descent(phi, V: np.ndarray, lam: np.ndarray, xtol: float, max_sweeps: int):
    """Pairwise weight-transfer descent: exact-ish line search along ``v_j - v_i``.

    A guided step moves weight between the vertices with the largest and
    smallest finite-difference slopes; when it stalls, every pair is swept.
    Stops when a full sweep improves nothing.
    """
    m = len(V)
    x = lam @ V
    fx = phi(x)

    def move(i, j):
        nonlocal x, fx, lam
        d = V[j] - V[i]
        span = float(np.linalg.norm(d))
        if span == 0 or lam[i] <= 0:
            return False
        h = lambda t: phi(x + t * d)
        res = minimize_scalar(h, bounds=(0.0, lam[i]), method="bounded",
                              options={"xatol": max(xtol / span, 1e-15)})
        t, ft = float(res.x), float(res.fun)
        # bounded Brent never probes the endpoints themselves
        f_end = h(lam[i])
        if f_end < ft:
            t, ft = lam[i], f_end
        if ft < fx - 1e-15 * max(1.0, abs(fx)):
            lam = lam.copy()
            lam[i] -= t
            lam[j] += t
            if lam[i] < 1e-15:
                lam[j] += lam[i]
                lam[i] = 0.0
            x = lam @ V
            fx = ft
            return True
        return False

    h_fd = 1e-7
    for _ in range(max_sweeps):
        for _ in range(50 * m):
            slopes = np.array([(phi(x + h_fd * (v - x)) - fx) / h_fd for v in V])
            active = np.flatnonzero(lam > 0)
            i = int(active[np.argmax(slopes[active])])
            j = int(np.argmin(slopes))
            if i == j or slopes[j] >= slopes[i] or not move(i, j):
                break
        improved = False
        for i in range(m):
            for j in range(m):
                if i != j and lam[i] > 0 and move(i, j):
                    improved = True
        if not improved:
            break
    return lam, x, fx


def _grid_refine(phi, X: Polytope, resolution: float = 1 / 8, rounds: int = 8):
    G = grid_points(X, resolution, 2000)
    best = G[int(np.argmin([phi(p) for p in G]))]
    for r in range(1, rounds + 1):
        pts = best + 0.5 ** r * (G - best)
        vals = [phi(p) for p in pts]
        k = int(np.argmin(vals))
        if vals[k] < phi(best):
            best = pts[k]
    return best


def mazur_schauder_minimize(
    phi,
    X,
    tol: float = DEFAULT_TOL,
    starts: int = 5,
    seed: int = 0,
    validate: bool = True,
    max_sweeps: int = 200,
) -> MinimizeResult:
    """Minimize a quasiconvex functional over a polytope (or a coercive truncation of R^n).

    Multi-start pairwise segment descent in barycentric weights, restarted
    from the barycenter and ``starts - 1`` seeded points, with a grid
    refinement as fallback when it finds a lower value.
    """
    f = _Counted(phi)
    if isinstance(X, UnboundedDomain):
        X = _truncate(f, X)
    if validate:
        _validate_quasiconvex(f, X, seed)
    V = X.vertices
    m = X.n_vertices
    rng = np.random.default_rng(seed)
    inits = [np.full(m, 1.0 / m)] + [rng.dirichlet(np.ones(m)) for _ in range(max(0, starts - 1))]
    best = None
    for lam in inits:
        lam, x, fx = _segment_descent(f, V, lam, tol, max_sweeps)
        if best is None or fx < best[1]:
            best = (x, fx, lam)
    g = _grid_refine(f, X)
    if f(g) < best[1] - tol:
        w = np.linalg.lstsq(np.vstack([V.T, np.ones(m)]), np.concatenate([g, [1.0]]), rcond=None)[0]
        if np.all(w >= -1e-12):
            lam, x, fx = _segment_descent(f, V, np.clip(w, 0, None) / np.clip(w, 0, None).sum(), tol, max_sweeps)
            if fx < best[1]:
                best = (x, fx, lam)
    return MinimizeResult(best[0], float(best[1]), X, f.calls)
