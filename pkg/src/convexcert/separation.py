"""Strict separation by hyperplanes, with margin certificates.

The normal is never normalized: for a point ``x`` outside ``C`` with
projection ``y`` the returned normal is ``u = x - y`` and the margin is
``<u, x> - <u, y> = |u|^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, PointInsideSet, SetsIntersect
from .geometry import DEFAULT_TOL, Hyperplane, Polytope, as_vector, minkowski_difference, project
from .lp import solve_lp


@dataclass(frozen=True)
class SeparationResult:
    hyperplane: Hyperplane
    witness_projection: np.ndarray
    margin: float
    vertex_slack: float
    """Largest violation of the certified vertex inequality (<= tol when valid)."""
    weak: bool = False

    @property
    def normal(self) -> np.ndarray:
        return self.hyperplane.normal


def separate_point(C: Polytope, x, tol: float = DEFAULT_TOL) -> SeparationResult:
    """Separate ``x`` from ``conv(C)`` through its projection ``y``.

    Every vertex ``z`` satisfies ``<u, z> <= <u, y> + vertex_slack`` and
    ``<u, y> < <u, x>`` with ``u = x - y``.
    """
    x = as_vector(x)
    if x.size != C.dim:
        raise DimensionMismatch(f"point has dimension {x.size}, polytope has {C.dim}")
    proj = project(C, x, tol)
    if proj.distance <= tol:
        raise PointInsideSet("point lies in the set", witness=proj.point, distance=proj.distance)
    y = proj.point
    u = x - y
    level = float(u @ y)
    margin = float(u @ x) - level
    slack = float(np.max(C.vertices @ u) - level)
    return SeparationResult(Hyperplane(u, level), y, margin, slack, weak=margin <= tol)


def common_point(K: Polytope, C: Polytope, tol: float = DEFAULT_TOL):
    """A point of ``conv(K) & conv(C)`` (within ``tol``), or None.

    The LP prefers low vertex indices, so identical inputs return vertex 0.
    """
    if K.dim != C.dim:
        raise DimensionMismatch(f"dimensions differ: {K.dim} vs {C.dim}")
    mk, mc = K.n_vertices, C.n_vertices
    M = np.hstack([K.vertices.T, -C.vertices.T])
    A_eq = np.zeros((2, mk + mc))
    A_eq[0, :mk] = 1.0
    A_eq[1, mk:] = 1.0
    cost = np.concatenate([np.arange(mk), np.arange(mc)]).astype(float)
    res = solve_lp(
        cost,
        A_ub=np.vstack([M, -M]),
        b_ub=np.full(2 * K.dim, tol),
        A_eq=A_eq,
        b_eq=[1.0, 1.0],
    )
    if res.status != 0:
        return None
    lam = np.clip(res.x[:mk], 0.0, None)
    return (lam / lam.sum()) @ K.vertices


def separate_sets(K: Polytope, C: Polytope, tol: float = DEFAULT_TOL) -> SeparationResult:
    """Strictly separate two disjoint polytopes.

    With ``u = -P_{C-K}(0)`` every ``x`` in ``C`` and ``x'`` in ``K`` satisfy
    ``<u, x> + |u|^2 <= <u, x'>`` (up to ``vertex_slack``). The hyperplane sits
    halfway between the two supporting levels.

    Raises
    ------
    SetsIntersect
        When the sets share a point; the point is in ``details['witness']``.
    """
    witness = common_point(K, C, tol)
    if witness is not None:
        raise SetsIntersect("sets intersect", witness=witness)
    D = minkowski_difference(C, K)
    proj = project(D, np.zeros(C.dim), tol)
    w = proj.point
    u = -w
    margin = float(u @ u)
    sup_c = float(np.max(C.vertices @ u))
    min_k = float(np.min(K.vertices @ u))
    slack = sup_c + margin - min_k
    return SeparationResult(
        Hyperplane(u, sup_c + 0.5 * margin), w, margin, slack, weak=margin <= tol
    )
