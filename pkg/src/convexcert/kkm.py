"""Finite KKM maps, their certified intersection point, and ball-cover
partition-of-unity selections.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, CoverGap, DimensionMismatch, InfeasibleIntersection
from .geometry import (
    DEFAULT_TOL,
    BarycentricCoords,
    Polytope,
    as_vector,
    barycentric_grid,
    contains_many,
    grid_points,
    project,
    subdivisions,
)
from .lp import solve_lp

MAX_DOMAIN = 10


@dataclass(frozen=True, eq=False)
class FiniteKKMMap:
    """Set-valued map ``domain_points[i] -> values[i]`` with values inside ``ambient``."""

    domain_points: np.ndarray
    values: tuple
    ambient: Polytope

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.domain_points, dtype=float))
        values = tuple(self.values)
        if len(values) != len(pts):
            raise ValueError("need exactly one value per domain point")
        for P in values:
            if P.dim != pts.shape[1] or P.dim != self.ambient.dim:
                raise DimensionMismatch("values, domain points and ambient must share a dimension")
        pts.setflags(write=False)
        object.__setattr__(self, "domain_points", pts)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    def values_in_ambient(self, tol: float = DEFAULT_TOL) -> bool:
        return all(contains_many(self.ambient, P.vertices, tol).all() for P in self.values)


@dataclass
class KKMCertificate:
    certified: bool
    resolution: float
    checked_points: int
    violation: Optional[tuple] = None
    """``(subset indices, point)`` of the first uncovered grid point."""


def verify_kkm(kmap: FiniteKKMMap, resolution: float = 1 / 16, tol: float = DEFAULT_TOL) -> KKMCertificate:
    """Check ``conv(S) <= union of values over S`` on a barycentric grid, for every subset S."""
    n = len(kmap)
    if n > MAX_DOMAIN:
        raise BudgetExceeded(f"{n} domain points exceed the subset budget of {MAX_DOMAIN}")
    k = subdivisions(resolution)
    checked = 0
    for size in range(1, n + 1):
        W = barycentric_grid(size, k)
        for S in itertools.combinations(range(n), size):
            pts = W @ kmap.domain_points[list(S)]
            covered = np.zeros(len(pts), dtype=bool)
            for i in S:
                todo = ~covered
                if not todo.any():
                    break
                covered[todo] = contains_many(kmap.values[i], pts[todo], tol)
            checked += len(pts)
            if not covered.all():
                bad = pts[int(np.argmin(covered))]
                return KKMCertificate(False, resolution, checked, (S, bad))
    return KKMCertificate(True, resolution, checked)


def _joint_lp(kmap: FiniteKKMMap, slack: bool):
    """Variables: one weight block per value, one for the domain hull, then (optionally) t.

    Every block must reproduce the same point; with ``slack`` the agreement is
    relaxed to ``|.|_inf <= t`` and ``t`` is minimized.
    """
    blocks = [P.vertices for P in kmap.values] + [kmap.domain_points]
    d = kmap.ambient.dim
    sizes = [len(B) for B in blocks]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    nvar = int(offsets[-1]) + (1 if slack else 0)
    A_eq = np.zeros((len(blocks), nvar))
    for i in range(len(blocks)):
        A_eq[i, offsets[i]:offsets[i + 1]] = 1.0
    rows = []
    for i in range(1, len(blocks)):
        M = np.zeros((d, nvar))
        M[:, offsets[0]:offsets[1]] = blocks[0].T
        M[:, offsets[i]:offsets[i + 1]] = -blocks[i].T
        rows.append(M)
    cost = np.zeros(nvar)
    if rows:
        M = np.vstack(rows)
        A_ub = np.vstack([M, -M])
        if slack:
            A_ub[:, -1] = -1.0
            cost[-1] = 1.0
        b_ub = np.zeros(A_ub.shape[0])
    else:
        A_ub = b_ub = None
    res = solve_lp(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=np.ones(len(blocks)))
    return res, blocks, offsets


def kkm_intersection(kmap: FiniteKKMMap, tol: float = DEFAULT_TOL) -> np.ndarray:
    """A point lying in every value and in ``conv(domain_points)``.

    Raises
    ------
    InfeasibleIntersection
        ``details['certificate']`` is the least sup-norm disagreement between
        the blocks; it is positive exactly when no common point exists.
    """
    res, blocks, offsets = _joint_lp(kmap, slack=False)
    if res.status != 0:
        relaxed, _, _ = _joint_lp(kmap, slack=True)
        cert = float(relaxed.x[-1]) if relaxed.status == 0 else float("inf")
        raise InfeasibleIntersection(
            "values have no common point in the domain hull", certificate=cert
        )
    points = []
    for i, B in enumerate(blocks):
        lam = np.clip(res.x[offsets[i]:offsets[i + 1]], 0.0, None)
        points.append((lam / lam.sum()) @ B)
    return np.mean(points, axis=0)


def intersection_residual(kmap: FiniteKKMMap, x, tol: float = DEFAULT_TOL) -> float:
    """Largest distance from ``x`` to a value or to the domain hull."""
    x = as_vector(x)
    sets = list(kmap.values) + [Polytope(kmap.domain_points)]
    return max(project(P, x, tol).distance for P in sets)


@dataclass(frozen=True, eq=False)
class SelectionMap:
    """``s(x) = sum_i lambda_i(x) y_i`` with a partition of unity subordinated to open balls.

    ``lambda_i(x)`` is proportional to ``max(0, r_i - |x - c_i|)``, the
    distance from ``x`` to the complement of ball ``i``.
    """

    cover_points: np.ndarray
    centers: np.ndarray
    radii: np.ndarray

    def weights(self, x) -> np.ndarray:
        X = np.atleast_2d(np.asarray(x, dtype=float))
        dist = np.linalg.norm(X[:, None, :] - self.centers[None, :, :], axis=2)
        w = np.maximum(0.0, self.radii[None, :] - dist)
        total = w.sum(axis=1, keepdims=True)
        if np.any(total <= 0):
            raise CoverGap("point lies in no ball", point=X[int(np.argmin(total[:, 0]))])
        w = w / total
        return w[0] if np.ndim(x) == 1 else w

    def __call__(self, x):
        return self.evaluate(x)[1]

    def evaluate(self, x):
        """Return ``(BarycentricCoords, s(x))`` for a single point."""
        w = self.weights(as_vector(x))
        return BarycentricCoords(w), w @ self.cover_points

    def evaluate_many(self, X) -> np.ndarray:
        return self.weights(np.atleast_2d(X)) @ self.cover_points


def build_selection(cover_points, open_sets, K: Polytope, resolution: float = 1 / 16) -> SelectionMap:
    """Build the selection after checking that the balls cover ``K`` on a grid.

    ``open_sets`` is a sequence of ``(center, radius)`` pairs, index-aligned
    with ``cover_points``.
    """
    Y = np.atleast_2d(np.asarray(cover_points, dtype=float))
    if len(open_sets) != len(Y):
        raise ValueError("need one ball per cover point")
    centers = np.atleast_2d(np.array([as_vector(c) for c, _ in open_sets]))
    radii = np.array([float(r) for _, r in open_sets])
    if centers.shape[1] != K.dim:
        raise DimensionMismatch("ball centers and K differ in dimension")
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    sel = SelectionMap(Y, centers, radii)
    pts = grid_points(K, resolution)
    dist = np.linalg.norm(pts[:, None, :] - centers[None, :, :], axis=2)
    inside = np.any(dist < radii[None, :], axis=1)
    if not inside.all():
        raise CoverGap("grid point of K lies in no ball", point=pts[int(np.argmin(inside))], resolution=resolution)
    return sel
