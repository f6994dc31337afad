"""Fixed points of affine self-maps of polytopes and common fixed points of
commuting families.

Common fixed points follow the induction on fixed-point sets: the fixed set
of each map, intersected with the current domain, is an affine slice of a
polytope; it is re-vertexified and handed to the next map, which maps it into
itself because the maps commute.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .alternatives import solve_matrix_game
from .errors import CommutativityViolated, DimensionMismatch, EmptySlice, NonConvergence, NotSelfMap
from .geometry import DEFAULT_TOL, Polytope, as_vector, contains_many, extreme_points
from .lp import solve_lp

SLICE_MAX_DIM = 6
SLICE_MAX_VERTICES = 64
SLICE_MAX_BASES = 200_000


@dataclass(frozen=True)
class AffineMap:
    """``x -> matrix @ x + offset``."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        b = as_vector(self.offset)
        if A.shape != (b.size, b.size):
            raise DimensionMismatch("matrix must be square and match the offset")
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "offset", b)

    @property
    def dim(self) -> int:
        return self.offset.size

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float) + self.offset

    def apply_many(self, X) -> np.ndarray:
        return np.atleast_2d(X) @ self.matrix.T + self.offset

    def residual(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(self(x) - x))

    def compose(self, other: "AffineMap") -> "AffineMap":
        """``self o other``."""
        return AffineMap(self.matrix @ other.matrix, self.matrix @ other.offset + self.offset)


@dataclass(frozen=True)
class AffineFamily:
    maps: tuple
    domain: Polytope

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("family must be nonempty")
        for phi in maps:
            if phi.dim != self.domain.dim:
                raise DimensionMismatch("maps and domain differ in dimension")
        object.__setattr__(self, "maps", maps)


def check_self_map(phi: AffineMap, X: Polytope, tol: float = DEFAULT_TOL):
    """Raise NotSelfMap unless every vertex image lies in X."""
    images = phi.apply_many(X.vertices)
    inside = contains_many(X, images, tol)
    if not inside.all():
        k = int(np.argmin(inside))
        raise NotSelfMap("map sends a vertex outside the domain", vertex=X.vertices[k], image=images[k])


def commutation_defect(phi: AffineMap, psi: AffineMap) -> float:
    """Largest entry of ``phi o psi - psi o phi`` (matrix and offset parts)."""
    a = phi.compose(psi)
    b = psi.compose(phi)
    return float(max(np.max(np.abs(a.matrix - b.matrix)), np.max(np.abs(a.offset - b.offset))))


def check_commuting(maps, tol: float = DEFAULT_TOL):
    for (i, phi), (j, psi) in itertools.combinations(enumerate(maps), 2):
        defect = commutation_defect(phi, psi)
        if defect > tol:
            raise CommutativityViolated("maps do not commute", pair=(i, j), defect=defect)


def _stack(eqs, n):
    if not eqs:
        return np.zeros((0, n)), np.zeros(0)
    return np.vstack([E for E, _ in eqs]), np.concatenate([e for _, e in eqs])


def _polish(sigma, X: Polytope, E, e, tol):
    """Nearest point to ``sigma`` in ``aff(X) & {Ex = e}``, or None if that set is empty."""
    v0, B, _ = X.affine_hull
    z_sigma = B.T @ (sigma - v0)
    if E.shape[0] == 0:
        return v0 + B @ z_sigma
    K = E @ B
    r = e - E @ v0
    if B.shape[1] == 0:
        return v0 if np.all(np.abs(r) <= tol) else None
    corr, *_ = np.linalg.lstsq(K, K @ z_sigma - r, rcond=None)
    z = z_sigma - corr
    if np.max(np.abs(K @ z - r), initial=0.0) > tol:
        return None
    return v0 + B @ z


def _slice_lp_point(X: Polytope, E, e, target, tol):
    """Point of ``X & {Ex = e}`` closest to ``target`` in sup norm (LP), or None."""
    m, n = X.n_vertices, X.dim
    Vt = X.vertices.T
    # variables (lam, t): min t, |V'lam - target| <= t, E V' lam = e, sum lam = 1
    A_ub = np.vstack([np.hstack([Vt, -np.ones((n, 1))]), np.hstack([-Vt, -np.ones((n, 1))])])
    b_ub = np.concatenate([target, -target])
    A_eq = np.vstack([np.concatenate([np.ones(m), [0.0]])[None, :], np.hstack([E @ Vt, np.zeros((E.shape[0], 1))])])
    b_eq = np.concatenate([[1.0], e])
    res = solve_lp(np.concatenate([np.zeros(m), [1.0]]), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                   bounds=[(0, None)] * m + [(0, None)])
    if res.status != 0:
        return None
    lam = np.clip(res.x[:m], 0.0, None)
    return (lam / lam.sum()) @ X.vertices


def _fixed_point(phi: AffineMap, X: Polytope, tol: float, eqs=(), start=None, max_iter: int = 1 << 17):
    n = phi.dim
    E0, e0 = _stack(list(eqs), n)
    I = np.eye(n)
    E = np.vstack([E0, I - phi.matrix])
    e = np.concatenate([e0, phi.offset])

    def ok(x):
        if x is None or phi.residual(x) > tol:
            return False
        if E0.shape[0] and np.max(np.abs(E0 @ x - e0)) > tol:
            return False
        return bool(contains_many(X, x[None, :], tol)[0])

    if not eqs:
        M = I - phi.matrix
        if np.linalg.cond(M) < 1e8:
            x = np.linalg.solve(M, phi.offset)
            if ok(x):
                return x
    x = X.barycenter if start is None else as_vector(start)
    total = np.zeros(n)
    count = 0
    chunk = 1
    while count < max_iter:
        s, x = kernels.cesaro_run(phi.matrix, phi.offset, x, chunk)
        total += s
        count += chunk
        sigma = total / count
        if ok(sigma):
            return sigma
        p = _polish(sigma, X, E, e, tol)
        if ok(p):
            return p
        chunk = count
    p = _slice_lp_point(X, E, e, total / count, tol)
    if ok(p):
        return p
    raise NonConvergence("Cesaro averaging did not reach the tolerance", residual=phi.residual(total / count), iterations=count)


def affine_fixed_point(phi: AffineMap, X: Polytope, tol: float = DEFAULT_TOL, max_iter: int = 1 << 17) -> np.ndarray:
    """A point ``x0`` of X with ``|phi(x0) - x0| <= tol``.

    Exact linear solve when ``I - A`` is well conditioned and the solution is
    in X; otherwise Cesaro averages of the orbit of the vertex barycenter,
    each checkpoint also tried after projection onto the affine fixed set.
    """
    if phi.dim != X.dim:
        raise DimensionMismatch("map and domain differ in dimension")
    check_self_map(phi, X, max(tol, 1e-9))
    return _fixed_point(phi, X, tol, max_iter=max_iter)


def affine_slice(X: Polytope, E, e, tol: float = DEFAULT_TOL):
    """Vertices of ``X & {x : Ex = e}`` by basic-solution enumeration.

    Basic solutions over a redundant vertex set can land on edges, so the
    candidates are pruned to extreme points at the end.

    Returns a Polytope, ``None`` when beyond the enumeration budget, and
    raises EmptySlice when the slice is empty.
    """
    E = np.atleast_2d(np.asarray(E, dtype=float))
    e = np.asarray(e, dtype=float).reshape(-1)
    m = X.n_vertices
    if X.dim > SLICE_MAX_DIM or m > SLICE_MAX_VERTICES:
        return None
    G = np.vstack([np.ones((1, m)), E @ X.vertices.T])
    rhs = np.concatenate([[1.0], e])
    # independent rows via SVD rank, then a well-conditioned row basis by QR pivoting
    s = np.linalg.svd(G, compute_uv=False)
    r = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    from scipy.linalg import qr

    _, _, piv = qr(G.T, pivoting=True, mode="economic")
    rows = np.sort(piv[:r])
    Gr, rr = G[rows], rhs[rows]
    if math.comb(m, r) > SLICE_MAX_BASES:
        return None
    pts = []
    for S in itertools.combinations(range(m), r):
        B = Gr[:, S]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        lam_s = np.linalg.solve(B, rr)
        if lam_s.min() < -tol:
            continue
        lam = np.zeros(m)
        lam[list(S)] = np.clip(lam_s, 0.0, None)
        if np.max(np.abs(G @ lam - rhs)) > 1e-8:
            continue
        pts.append(lam @ X.vertices)
    if not pts:
        raise EmptySlice("affine slice of the domain is empty")
    P = np.array(pts)
    _, first = np.unique(np.round(P, 12), axis=0, return_index=True)
    return extreme_points(Polytope(P[np.sort(first)]))


def common_fixed_point(family: AffineFamily, tol: float = DEFAULT_TOL) -> np.ndarray:
    """A point fixed by every map of a commuting family.

    Raises CommutativityViolated for a non-commuting pair, EmptySlice if a
    fixed-point slice comes out empty (numerical failure), NotSelfMap if a map
    does not preserve its slice.
    """
    maps = family.maps
    check_commuting(maps, max(tol, 1e-9))
    for phi in maps:
        check_self_map(phi, family.domain, max(tol, 1e-9))
    n = family.domain.dim
    domain = family.domain
    pending = []
    for k, phi in enumerate(maps[:-1]):
        pending = pending + [(np.eye(n) - phi.matrix, phi.offset)]
        E, e = _stack(pending, n)
        sl = affine_slice(domain, E, e, tol)
        if sl is None:
            continue
        domain, pending = sl, []
        nxt = maps[k + 1]
        images = nxt.apply_many(domain.vertices)
        inside = contains_many(domain, images, max(tol, 1e-9))
        if not inside.all():
            raise NotSelfMap("next map does not preserve the fixed-point slice", stage=k, image=images[int(np.argmin(inside))])
    start = None
    if pending:
        E, e = _stack(pending, n)
        start = _slice_lp_point(domain, E, e, domain.barycenter, tol)
        if start is None:
            raise EmptySlice("fixed-point slice is empty")
    x = _fixed_point(maps[-1], domain, tol, eqs=pending, start=start)
    worst = max(phi.residual(x) for phi in maps)
    if worst > tol:
        raise NonConvergence("common fixed point residual above tolerance", residual=worst)
    return x


def dual_certificate(phi: AffineMap, x) -> float:
    """``max l(phi(x) - x)`` over the 2n functionals ``+-e_i``."""
    d = phi(x) - np.asarray(x, dtype=float)
    return float(np.max(np.concatenate([d, -d])))


def saddle_route_fixed_point(phi: AffineMap, X: Polytope):
    """Fixed point via the saddle point of ``f(x, l) = l(phi(x) - x)``.

    With ``l`` ranging over ``conv{+-e_i}`` and ``x`` over X this is a matrix
    game between functional weights (maximizing) and vertex weights
    (minimizing). Returns ``(x0, value)``; the value is
    ``min_x |phi(x) - x|_inf``.
    """
    n = phi.dim
    D = np.vstack([np.eye(n), -np.eye(n)])
    disp = X.vertices @ (phi.matrix - np.eye(n)).T + phi.offset
    game = D @ disp.T
    _, w, _, value = solve_matrix_game(game)
    return w @ X.vertices, value
