"""Common points of polytope families and the Ghouila-Houri/Klee check.

For a family ``C_1 .. C_n`` whose union is convex and whose proper
subfamilies all have a common point, the whole family has a common point.
:func:`check_ghouila_houri` verifies the hypotheses (union convexity only at
a stated sampling resolution) and returns either the common point or a
certificate for whichever hypothesis fails.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch
from .geometry import DEFAULT_TOL, Polytope, contains_many, grid_points
from .lp import solve_lp

MAX_FAMILY = 12


def _check_family(family):
    family = list(family)
    if not family:
        raise ValueError("family must be nonempty")
    d = family[0].dim
    for P in family:
        if P.dim != d:
            raise DimensionMismatch("family members have different dimensions")
    return family


def find_common_point(family, tol: float = DEFAULT_TOL) -> Optional[np.ndarray]:
    """One joint LP over per-member barycentric blocks; None iff infeasible."""
    family = _check_family(family)
    d = family[0].dim
    sizes = [P.n_vertices for P in family]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    nvar = int(offsets[-1])
    A_eq = np.zeros((len(family), nvar))
    for i, (lo, hi) in enumerate(zip(offsets[:-1], offsets[1:])):
        A_eq[i, lo:hi] = 1.0
    rows = []
    for i in range(1, len(family)):
        M = np.zeros((d, nvar))
        M[:, offsets[0]:offsets[1]] = family[0].vertices.T
        M[:, offsets[i]:offsets[i + 1]] = -family[i].vertices.T
        rows.append(M)
    ones = np.ones(len(family))
    if rows:
        M = np.vstack(rows)
        # exact coupling first, so the point sits in every member up to solver precision
        res = solve_lp(np.zeros(nvar), A_eq=np.vstack([A_eq, M]), b_eq=np.concatenate([ones, np.zeros(len(M))]))
        if res.status != 0:
            res = solve_lp(np.zeros(nvar), A_ub=np.vstack([M, -M]), b_ub=np.full(2 * len(M), tol), A_eq=A_eq, b_eq=ones)
    else:
        res = solve_lp(np.zeros(nvar), A_eq=A_eq, b_eq=ones)
    if res.status != 0:
        return None
    lam = np.clip(res.x[: sizes[0]], 0.0, None)
    return (lam / lam.sum()) @ family[0].vertices


def subfamily_table(family, tol: float = DEFAULT_TOL):
    """Common point (or None) for every proper nonempty subfamily.

    Larger subfamilies are solved first; a smaller one inherits the witness of
    any feasible superset, so only genuinely new LPs are run.
    """
    family = _check_family(family)
    n = len(family)
    if n > MAX_FAMILY:
        raise BudgetExceeded(f"family of {n} exceeds the subfamily budget of {MAX_FAMILY}")
    table = {}
    for k in range(n - 1, 0, -1):
        for combo in itertools.combinations(range(n), k):
            witness = None
            for sup, w in table.items():
                if w is not None and len(sup) > k and set(combo) <= set(sup):
                    witness = w
                    break
            if witness is None:
                witness = find_common_point([family[i] for i in combo], tol)
            table[combo] = witness
    return table


@dataclass
class UnionConvexity:
    certified_at_resolution: float
    counter_witness: Optional[np.ndarray] = None
    pair: Optional[tuple] = None
    pairs_checked: int = 0


@dataclass
class FamilyReport:
    subfamily_intersections: dict
    hypothesis_ii: bool
    union_convexity: UnionConvexity
    full_intersection: Optional[np.ndarray]
    status: str
    """One of ``common_point``, ``subfamily_empty``, ``union_not_convex``,
    ``resolution_insufficient``."""
    notes: list = field(default_factory=list)


def _in_union(family, pts, tol):
    inside = np.zeros(len(pts), dtype=bool)
    for P in family:
        todo = ~inside
        if not todo.any():
            break
        inside[todo] = contains_many(P, pts[todo], tol)
    return inside


def union_midpoint_search(
    family,
    resolution: float,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_points_per_member: int = 500,
    max_grid_pairs: int = 100_000,
    random_pairs: int = 1000,
    chunk: int = 20_000,
) -> UnionConvexity:
    """Look for a midpoint of two union points that leaves the union.

    Grid pairs (cross-member, deterministic order) come first, then seeded
    random pairs. Returns the first failing midpoint, if any.
    """
    family = _check_family(family)
    grids = [grid_points(P, resolution, max_points_per_member, seed) for P in family]
    member_pairs = list(itertools.combinations(range(len(family)), 2))
    total = sum(len(grids[i]) * len(grids[j]) for i, j in member_pairs)
    stride = max(1, -(-total // max_grid_pairs))
    checked = 0
    base = 0
    for i, j in member_pairs:
        gi, gj = grids[i], grids[j]
        count = len(gi) * len(gj)
        first = (-base) % stride
        flat = np.arange(first, count, stride)
        base += count
        for lo in range(0, len(flat), chunk):
            idx = flat[lo : lo + chunk]
            a, b = gi[idx // len(gj)], gj[idx % len(gj)]
            mids = 0.5 * (a + b)
            inside = _in_union(family, mids, tol)
            checked += len(idx)
            if not inside.all():
                k = int(np.argmin(inside))
                return UnionConvexity(resolution, mids[k], (a[k], b[k]), checked)
    rng = np.random.default_rng(seed)
    n = len(family)
    if n >= 2 and random_pairs > 0:
        picks = rng.integers(0, n, size=(random_pairs, 2))
        a = np.array([rng.dirichlet(np.ones(family[i].n_vertices)) @ family[i].vertices for i in picks[:, 0]])
        b = np.array([rng.dirichlet(np.ones(family[i].n_vertices)) @ family[i].vertices for i in picks[:, 1]])
        mids = 0.5 * (a + b)
        inside = _in_union(family, mids, tol)
        checked += random_pairs
        if not inside.all():
            k = int(np.argmin(inside))
            return UnionConvexity(resolution, mids[k], (a[k], b[k]), checked)
    return UnionConvexity(resolution, None, None, checked)


def check_ghouila_houri(family, resolution: float = 1 / 8, tol: float = DEFAULT_TOL, seed: int = 0, **search) -> FamilyReport:
    """Check both hypotheses and the conclusion on a finite family.

    Hypothesis (ii) (every proper subfamily meets) is decided exactly by LP;
    union convexity is certified at ``resolution`` only.
    """
    family = _check_family(family)
    n = len(family)
    if n > MAX_FAMILY:
        raise BudgetExceeded(f"family of {n} exceeds the subfamily budget of {MAX_FAMILY}")
    if n < 2:
        raise ValueError("family needs at least two members")
    table = subfamily_table(family, tol)
    hyp_ii = all(w is not None for w in table.values())
    full = find_common_point(family, tol)
    union = union_midpoint_search(family, resolution, tol, seed, **search)
    notes = []
    if full is not None:
        status = "common_point"
    elif not hyp_ii:
        status = "subfamily_empty"
    elif union.counter_witness is not None:
        status = "union_not_convex"
    else:
        status = "resolution_insufficient"
        notes.append("hypotheses pass at this resolution but the family has no common point; refine the resolution")
    return FamilyReport(table, hyp_ii, union, full, status, notes)
