"""Primitives over V-representation polytopes.

A :class:`Polytope` is the convex hull of a finite vertex list. Membership,
projection and linear maximization are reduced to problems over barycentric
weights: an LP for membership, a simplex-constrained least-squares problem
for projection.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import kernels
from .errors import DimensionMismatch, NonConvergence
from .lp import solve_lp

DEFAULT_TOL = 1e-9


def as_vector(x) -> np.ndarray:
    """Coerce to a finite 1-D float array."""
    v = np.array(x, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValueError("vector must have dimension >= 1")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex hull of ``vertices`` (an ``(m, n)`` array; redundant rows allowed)."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        if V.ndim == 1:
            V = V.reshape(-1, 1)
        if V.ndim != 2 or V.shape[0] == 0 or V.shape[1] == 0:
            raise ValueError("polytope needs a nonempty list of equal-length vertices")
        if not np.all(np.isfinite(V)):
            raise ValueError("vertex coordinates must be finite")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @cached_property
    def barycenter(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    @cached_property
    def gram(self) -> np.ndarray:
        return self.vertices @ self.vertices.T

    @cached_property
    def affine_hull(self):
        """``(origin, basis, complement)`` with orthonormal columns.

        ``x`` lies in the affine hull iff ``complement.T @ (x - origin) == 0``.
        """
        v0 = self.barycenter
        D = self.vertices - v0
        _, s, wt = np.linalg.svd(D, full_matrices=True)
        scale = max(1.0, float(s[0]) if s.size else 0.0)
        r = int(np.sum(s > 1e-10 * scale))
        return v0, wt[:r].T, wt[r:].T

    @cached_property
    def _facets(self):
        v0, B, N = self.affine_hull
        r = B.shape[1]
        if r == 0:
            A = np.zeros((0, self.dim))
            b = np.zeros(0)
        elif r == 1:
            t = (self.vertices - v0) @ B[:, 0]
            A = np.vstack([B[:, 0], -B[:, 0]])
            b = np.array([t.max(), -t.min()]) + A @ v0
        else:
            try:
                hull = ConvexHull((self.vertices - v0) @ B)
            except QhullError:
                return None
            normals, offsets = hull.equations[:, :-1], hull.equations[:, -1]
            A = normals @ B.T
            b = -offsets + A @ v0
        return A, b, N, v0

    def point(self, weights) -> np.ndarray:
        """Convex combination of the vertices with the given weights."""
        return np.asarray(weights, dtype=float) @ self.vertices

    def __repr__(self):
        return f"Polytope(n_vertices={self.n_vertices}, dim={self.dim})"


@dataclass(frozen=True)
class Hyperplane:
    """The set ``{z : <normal, z> = offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = as_vector(self.normal)
        if not np.linalg.norm(n) > 0:
            raise ValueError("hyperplane normal must be nonzero")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    def side(self, z) -> float:
        return float(self.normal @ as_vector(z) - self.offset)


@dataclass(frozen=True)
class BarycentricCoords:
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    def is_valid(self, tol: float = DEFAULT_TOL) -> bool:
        w = self.weights
        return bool(np.all(w >= -tol) and abs(w.sum() - 1.0) <= tol)


class Projection(NamedTuple):
    point: np.ndarray
    distance: float
    weights: np.ndarray
    gap: float


def _check_dim(P: Polytope, x) -> np.ndarray:
    x = as_vector(x)
    if x.size != P.dim:
        raise DimensionMismatch(f"point has dimension {x.size}, polytope has {P.dim}")
    return x


def contains(P: Polytope, x, tol: float = DEFAULT_TOL) -> bool:
    """LP feasibility: is some convex combination of vertices within ``tol`` of ``x``?"""
    x = _check_dim(P, x)
    return contains_weights(P, x, tol) is not None


def contains_weights(P: Polytope, x, tol: float = DEFAULT_TOL):
    """Barycentric weights reproducing ``x`` within ``tol`` (sup norm), or None."""
    x = _check_dim(P, x)
    Vt = P.vertices.T
    m = P.n_vertices
    res = solve_lp(
        np.zeros(m),
        A_ub=np.vstack([Vt, -Vt]),
        b_ub=np.concatenate([x + tol, -x + tol]),
        A_eq=np.ones((1, m)),
        b_eq=[1.0],
    )
    if res.status != 0:
        return None
    return np.clip(res.x, 0.0, None)


def contains_many(P: Polytope, points, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorized membership for a batch of points.

    Uses the facet description of ``P`` (computed once and cached); falls back
    to per-point projection when Qhull cannot describe the hull.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != P.dim:
        raise DimensionMismatch(f"points have dimension {pts.shape[1]}, polytope has {P.dim}")
    facets = P._facets
    if facets is None:
        return np.array([project(P, p, tol).distance <= tol for p in pts], dtype=bool)
    A, b, N, v0 = facets
    ok = np.ones(len(pts), dtype=bool)
    if A.shape[0]:
        ok &= np.all(pts @ A.T - b <= tol, axis=1)
    if N.shape[1]:
        ok &= np.all(np.abs((pts - v0) @ N) <= tol, axis=1)
    return ok


def _affine_minimizer(G, c, S):
    k = len(S)
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = G[np.ix_(S, S)]
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.concatenate([c[S], [1.0]])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:k]


def _fw_gap(G, c, lam):
    g = G @ lam - c
    return float(g @ lam - g.min()), g


def _polish(G, c, lam, max_rounds):
    """Wolfe-style active-set refinement started from a Frank-Wolfe iterate.

    Drives the gap to rounding level once the correct face is identified.
    """
    best = lam
    best_gap, g = _fw_gap(G, c, lam)
    lam = lam.copy()
    S = [int(i) for i in np.flatnonzero(lam > 0)]
    floor = 1e-15 * max(1.0, float(np.max(np.abs(np.diag(G)))))
    for _ in range(max_rounds):
        for _ in range(len(S) + 1):
            mu = _affine_minimizer(G, c, S)
            if mu.min() > 0:
                break
            cur = lam[S]
            neg = mu <= 0
            ratios = cur[neg] / (cur[neg] - mu[neg])
            theta = float(ratios.min())
            new = cur + theta * (mu - cur)
            drop = int(np.flatnonzero(neg)[np.argmin(ratios)])
            new[drop] = 0.0
            new[new < 0] = 0.0
            lam[:] = 0.0
            lam[S] = new
            S = [i for i, w in zip(S, new) if w > 0]
            if not S:
                return best
        else:
            break
        lam[:] = 0.0
        lam[S] = mu
        gap, g = _fw_gap(G, c, lam)
        if gap < best_gap:
            best, best_gap = lam.copy(), gap
        if gap <= floor:
            break
        s = int(np.argmin(g))
        if s in S:
            break
        S.append(s)
    return best


def project(P: Polytope, x, tol: float = DEFAULT_TOL, warm_start=None) -> Projection:
    """Euclidean projection of ``x`` onto ``conv(P)``.

    Away-step Frank-Wolfe over the barycentric weights until the Frank-Wolfe
    gap ``max_z <x - y, z - y>`` is at most ``tol``, followed by an active-set
    polish. The returned ``gap`` is recomputed in the ambient space and is
    exactly the slack of the variational inequality at the vertices.

    Raises
    ------
    NonConvergence
        If the gap is still above ``tol`` after the iteration budget.
    """
    x = _check_dim(P, x)
    V = P.vertices
    m = P.n_vertices
    c = V @ x
    if warm_start is None:
        lam0 = np.zeros(m)
        lam0[int(np.argmin(np.sum((V - x) ** 2, axis=1)))] = 1.0
    else:
        lam0 = np.asarray(warm_start, dtype=float)
    budget = int(10 * P.dim * m * max(1.0, math.log(1.0 / tol))) + 10
    lam, _, _ = kernels.away_step_fw(P.gram, c, lam0, tol, budget)
    lam = _polish(P.gram, c, lam, 2 * m + 10)
    lam = lam / lam.sum()
    y = lam @ V
    u = x - y
    gap = float(np.max((V - y) @ u))
    gap = max(gap, 0.0)
    if gap > tol:
        raise NonConvergence(
            f"projection did not reach gap {tol:g} (achieved {gap:.3g})", residual=gap
        )
    return Projection(y, float(np.linalg.norm(u)), lam, gap)


def distance(P: Polytope, x, tol: float = DEFAULT_TOL) -> float:
    return project(P, x, tol).distance


def minkowski_difference(C: Polytope, K: Polytope) -> Polytope:
    """Vertex list ``{c - k}`` (exact duplicates removed, first occurrence kept)."""
    if C.dim != K.dim:
        raise DimensionMismatch(f"dimensions differ: {C.dim} vs {K.dim}")
    diffs = (C.vertices[:, None, :] - K.vertices[None, :, :]).reshape(-1, C.dim)
    _, first = np.unique(diffs, axis=0, return_index=True)
    return Polytope(diffs[np.sort(first)])


def extreme_points(P: Polytope) -> Polytope:
    """Drop vertices that are not extreme (Qhull in affine-hull coordinates).

    Returns ``P`` unchanged when Qhull cannot handle the configuration.
    """
    v0, B, _ = P.affine_hull
    r = B.shape[1]
    coords = (P.vertices - v0) @ B
    if r == 0:
        keep = [0]
    elif r == 1:
        keep = sorted({int(np.argmin(coords[:, 0])), int(np.argmax(coords[:, 0]))})
    else:
        try:
            keep = sorted(ConvexHull(coords).vertices.tolist())
        except QhullError:
            return P
    return P if len(keep) == P.n_vertices else Polytope(P.vertices[keep])


def linear_maximize(P: Polytope, u):
    """Vertex maximizing ``<u, v>``; ties go to the lowest vertex index."""
    u = _check_dim(P, u)
    vals = P.vertices @ u
    i = int(np.argmax(vals))
    return P.vertices[i].copy(), float(vals[i])


def grid_size(m: int, k: int) -> int:
    return math.comb(k + m - 1, m - 1)


def barycentric_grid(m: int, k: int) -> np.ndarray:
    """All weight vectors in the m-simplex with entries in ``{0, 1/k, ..., 1}``."""
    if m == 1:
        return np.ones((1, 1))
    bars = np.array(list(itertools.combinations(range(k + m - 1), m - 1)), dtype=np.int64)
    if bars.size == 0:
        bars = bars.reshape(0, m - 1)
    padded = np.hstack([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), k + m - 1)])
    return (np.diff(padded, axis=1) - 1) / k


def subdivisions(resolution: float) -> int:
    if not 0 < resolution <= 1:
        raise ValueError("resolution must lie in (0, 1]")
    return max(1, int(math.ceil(1.0 / resolution - 1e-9)))


def grid_points(P: Polytope, resolution: float, max_points: int = 20000, seed: int = 0) -> np.ndarray:
    """Barycentric grid points of ``P`` at the given step.

    When the full grid would exceed ``max_points`` the vertices are kept and
    the rest is replaced by seeded uniform (Dirichlet) samples.
    """
    k = subdivisions(resolution)
    m = P.n_vertices
    if grid_size(m, k) <= max_points:
        return barycentric_grid(m, k) @ P.vertices
    rng = np.random.default_rng(seed)
    W = rng.dirichlet(np.ones(m), size=max(0, max_points - m))
    return np.vstack([P.vertices, W @ P.vertices])
