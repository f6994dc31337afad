"""Nonlinear alternatives, the sup-inf/inf-sup gap, and saddle points.

Bifunctions are evaluated on barycentric grids of the two polytopes and the
grids are refined around incumbent optima (homothetic copies of the coarse
grid shrunk by 2 each round). Bilinear instances flagged as such skip the
grids and are solved exactly as a matrix game by LP.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import PrecondViolated, ResolutionInsufficient, StructureViolation, TheoremViolation
from .geometry import DEFAULT_TOL, Polytope, as_vector, contains_many, grid_points
from .lp import solve_lp

COARSE_RESOLUTION = 1 / 8
REFINE_ROUNDS = 5
MAX_GRID = 2000

_IMPLIED = {
    "affine_in_x": {"quasiconvex_in_x", "quasiconcave_in_x", "lsc_in_x", "usc_in_x"},
    "affine_in_y": {"quasiconvex_in_y", "quasiconcave_in_y", "lsc_in_y", "usc_in_y"},
    "continuous": {"lsc_in_x", "usc_in_x", "lsc_in_y", "usc_in_y"},
}


def expand_tags(tags) -> frozenset:
    out = set(tags)
    for t in list(out):
        out |= _IMPLIED.get(t, set())
    return frozenset(out)


@dataclass(frozen=True, eq=False)
class BifunctionInstance:
    """A real function ``f(x, y)`` on ``X x Y`` with declared structure tags.

    ``batch(xs, ys)`` (optional) returns the ``(len(xs), len(ys))`` matrix of
    values. ``bilinear_matrix`` marks ``f(x, y) = x' M y`` explicitly; it is
    never inferred.
    """

    X: Polytope
    Y: Polytope
    func: Callable
    tags: frozenset = frozenset()
    batch: Optional[Callable] = None
    bilinear_matrix: Optional[np.ndarray] = None
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "tags", expand_tags(self.tags))
        if self.bilinear_matrix is not None:
            M = np.atleast_2d(np.asarray(self.bilinear_matrix, dtype=float))
            if M.shape != (self.X.dim, self.Y.dim):
                raise ValueError("bilinear matrix shape must be (dim X, dim Y)")
            object.__setattr__(self, "bilinear_matrix", M)

    def __call__(self, x, y) -> float:
        return float(self.func(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))

    def values(self, xs, ys) -> np.ndarray:
        xs = np.atleast_2d(xs)
        ys = np.atleast_2d(ys)
        if self.batch is not None:
            return np.asarray(self.batch(xs, ys), dtype=float)
        return np.array([[self(x, y) for y in ys] for x in xs])

    def has(self, *tags) -> bool:
        return all(t in self.tags for t in tags)


@dataclass
class AlternativeOutcome:
    branch: str
    witness: np.ndarray
    certificate: dict = field(default_factory=dict)


def quasiconvexity_violation(f, segment, samples: int = 65, tol: float = DEFAULT_TOL):
    """Return ``(t1, t2, t3)`` with ``f(t2) > max(f(t1), f(t3)) + tol``, or None.

    Points are ``(1 - t) a + t b`` for ``t`` on a uniform grid of ``samples``.
    """
    if samples < 3:
        raise ValueError("need at least 3 samples")
    a, b = (as_vector(p) for p in segment)
    ts = np.linspace(0.0, 1.0, samples)
    vals = np.array([float(f((1 - t) * a + t * b)) for t in ts])
    left = np.minimum.accumulate(vals)
    right = np.minimum.accumulate(vals[::-1])[::-1]
    excess = vals[1:-1] - np.maximum(left[:-2], right[2:])
    j = 1 + int(np.argmax(excess))
    if excess[j - 1] <= tol:
        return None
    # the most violated sample, bracketed by the lowest values on each side
    i = int(np.argmin(vals[:j]))
    k = j + 1 + int(np.argmin(vals[j + 1:]))
    return ts[i], ts[j], ts[k]


def is_quasiconvex_1d(f, segment, samples: int = 65, tol: float = DEFAULT_TOL) -> bool:
    """Necessary check for quasiconvexity of ``f`` along a segment."""
    return quasiconvexity_violation(f, segment, samples, tol) is None


def _random_point(P: Polytope, rng):
    return rng.dirichlet(np.ones(P.n_vertices)) @ P.vertices


def validate_tags(inst: BifunctionInstance, seed: int = 0, segments: int = 6, samples: int = 33, tol: float = 1e-9):
    """Spot-check the quasiconvexity/quasiconcavity tags along random segments.

    Raises StructureViolation naming the tag and the failing segment.
    """
    rng = np.random.default_rng(seed)
    checks = []
    for tag, side, sign in (
        ("quasiconvex_in_x", "x", 1.0),
        ("quasiconcave_in_x", "x", -1.0),
        ("quasiconvex_in_y", "y", 1.0),
        ("quasiconcave_in_y", "y", -1.0),
    ):
        if tag in inst.tags:
            checks.append((tag, side, sign))
    for tag, side, sign in checks:
        for _ in range(segments):
            if side == "x":
                other = _random_point(inst.Y, rng)
                a, b = _random_point(inst.X, rng), _random_point(inst.X, rng)
                f = lambda p, o=other: sign * inst(p, o)
            else:
                other = _random_point(inst.X, rng)
                a, b = _random_point(inst.Y, rng), _random_point(inst.Y, rng)
                f = lambda p, o=other: sign * inst(o, p)
            bad = quasiconvexity_violation(f, (a, b), samples, tol)
            if bad is not None:
                raise StructureViolation(f"declared tag {tag!r} fails along a segment", tag=tag, segment=(a, b), ts=bad, fixed=other)


def _require(inst: BifunctionInstance, *tags):
    missing = [t for t in tags if t not in inst.tags]
    if missing:
        raise StructureViolation(f"instance lacks required tags {missing}", missing=missing)


def _extremize(F, A: Polytope, B: Polytope, outer_max: bool, inner_min: bool, resolution: float, rounds: int):
    """Optimize ``outer_{a in A} inner_{b in B} F(a, b)`` on refined grids.

    ``F(as, bs)`` returns a matrix. Each round adds a copy of the coarse grid
    shrunk by ``2**-r`` around the incumbent on both sides.
    """
    Ga = grid_points(A, resolution, MAX_GRID)
    Gb = grid_points(B, resolution, MAX_GRID)
    Pa, Pb = Ga, Gb
    for r in range(rounds + 1):
        M = F(Pa, Pb)
        inner = M.min(axis=1) if inner_min else M.max(axis=1)
        i = int(np.argmax(inner)) if outer_max else int(np.argmin(inner))
        j = int(np.argmin(M[i])) if inner_min else int(np.argmax(M[i]))
        a_star, b_star = Pa[i], Pb[j]
        if r == rounds:
            break
        ratio = 0.5 ** (r + 1)
        Pa = np.vstack([Pa, a_star + ratio * (Ga - a_star)])
        Pb = np.vstack([Pb, b_star + ratio * (Gb - b_star)])
    return float(inner[i]), a_star, b_star, Pa, Pb, M.size


def _diameter(P: Polytope) -> float:
    V = P.vertices
    return float(np.max(np.linalg.norm(V[:, None, :] - V[None, :, :], axis=2)))


def lipschitz_pad(values: np.ndarray, points: np.ndarray, P: Polytope, resolution: float) -> float:
    """Lipschitz estimate from nearest grid neighbours times the coarse grid step."""
    if len(points) < 2:
        return 0.0
    tree = cKDTree(points)
    k = min(len(points), 2 * points.shape[1] + 1)
    dist, idx = tree.query(points, k=k)
    dist, idx = dist[:, 1:], idx[:, 1:]
    ok = dist > 1e-12
    if not ok.any():
        return 0.0
    slopes = np.abs(values[idx] - values[:, None])[ok] / dist[ok]
    return float(slopes.max() * _diameter(P) * resolution)


def infsup_alternative(
    inst: BifunctionInstance,
    lam: float,
    resolution: float = COARSE_RESOLUTION,
    tol: float = DEFAULT_TOL,
    rounds: int = REFINE_ROUNDS,
    validate: bool = True,
    seed: int = 0,
    branch: Optional[str] = None,
) -> AlternativeOutcome:
    """Decide which branch of the infsup alternative holds at level ``lam``.

    Branch A: a diagonal point with ``f(x0, x0) > lam``. Branch B: ``x_bar``
    with ``f(x_bar, y) <= lam`` for all ``y`` in ``Y`` (grid max plus a
    Lipschitz pad, zero when ``f`` is quasiconvex in ``y``). ``branch``
    restricts the search to one side.
    """
    _require(inst, "lsc_in_x", "quasiconvex_in_x", "quasiconcave_in_y")
    if not contains_many(inst.X, inst.Y.vertices, tol).all():
        raise PrecondViolated("Y must be contained in X")
    if validate:
        validate_tags(inst, seed)
    checked = 0
    if branch in (None, "A"):
        diag = lambda xs, _ys: np.array([[inst(x, x)] for x in xs])
        best, x0, _, _, _, n = _extremize(diag, inst.X, Polytope(inst.X.vertices[:1]), True, True, resolution, rounds)
        checked += n
        if best > lam + tol:
            return AlternativeOutcome("A", x0, {
                "checked_points": checked, "value": best, "slack": best - lam,
                "max_violation": lam - best, "resolution": resolution, "fixed_point_of_upper_section": True,
            })
    if branch in (None, "B"):
        val, xbar, ystar, _, Pb, n = _extremize(inst.values, inst.X, inst.Y, False, False, resolution, rounds)
        checked += n
        pad = 0.0
        if "quasiconvex_in_y" not in inst.tags:
            pad = lipschitz_pad(inst.values(xbar, Pb)[0], Pb, inst.Y, resolution)
        if val + pad <= lam + tol:
            return AlternativeOutcome("B", xbar, {
                "checked_points": checked, "value": val, "lipschitz_pad": pad,
                "max_violation": val + pad - lam, "resolution": resolution,
            })
    raise ResolutionInsufficient(
        "neither branch certified at this resolution", checked_points=checked, lam=lam
    )


def _same_domain(P: Polytope, Q: Polytope) -> bool:
    return P is Q or (P.vertices.shape == Q.vertices.shape and np.array_equal(P.vertices, Q.vertices))


def check_dominance(f: BifunctionInstance, g: BifunctionInstance, resolution: float = COARSE_RESOLUTION, tol: float = DEFAULT_TOL):
    """Raise PrecondViolated with a witness if ``f > g + tol`` somewhere on the grid."""
    if not (_same_domain(f.X, g.X) and _same_domain(f.Y, g.Y)):
        raise PrecondViolated("f and g must share X and Y")
    Gx = grid_points(f.X, resolution, MAX_GRID)
    Gy = grid_points(f.Y, resolution, MAX_GRID)
    excess = f.values(Gx, Gy) - g.values(Gx, Gy)
    i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
    if excess[i, j] > tol:
        raise PrecondViolated("f exceeds g", witness=(Gx[i], Gy[j]), excess=float(excess[i, j]))
    return excess.size


def two_function_alternative(
    f: BifunctionInstance,
    g: BifunctionInstance,
    lam: float,
    resolution: float = COARSE_RESOLUTION,
    tol: float = DEFAULT_TOL,
    rounds: int = REFINE_ROUNDS,
    branch: Optional[str] = None,
) -> AlternativeOutcome:
    """Branch A: ``x_bar`` with ``g(x_bar, y) >= lam`` for all y. Branch B:
    ``y_bar`` with ``f(x, y_bar) <= lam`` for all x. A is reported when both hold.
    """
    checked = check_dominance(f, g, resolution, tol)
    alpha = beta = None
    if branch in (None, "A"):
        alpha, xbar, _, _, Pb, n = _extremize(g.values, g.X, g.Y, True, True, resolution, rounds)
        checked += n
        pad = 0.0
        if "quasiconcave_in_y" not in g.tags:
            pad = lipschitz_pad(g.values(xbar, Pb)[0], Pb, g.Y, resolution)
        if alpha - pad >= lam - tol:
            return AlternativeOutcome("A", xbar, {
                "checked_points": checked, "value": alpha, "lipschitz_pad": pad,
                "max_violation": lam - (alpha - pad), "resolution": resolution,
            })
    if branch in (None, "B"):
        ft = lambda ys, xs: f.values(xs, ys).T
        beta, ybar, _, _, Pa, n = _extremize(ft, f.Y, f.X, False, False, resolution, rounds)
        checked += n
        pad = 0.0
        if "quasiconvex_in_x" not in f.tags:
            pad = lipschitz_pad(f.values(Pa, ybar)[:, 0], Pa, f.X, resolution)
        if beta + pad <= lam + tol:
            return AlternativeOutcome("B", ybar, {
                "checked_points": checked, "value": beta, "lipschitz_pad": pad,
                "max_violation": beta + pad - lam, "resolution": resolution,
            })
    raise ResolutionInsufficient(
        "neither branch certified at this resolution", alpha=alpha, beta=beta, lam=lam
    )


@dataclass
class GapResult:
    alpha: float
    beta: float
    x_alpha: np.ndarray
    y_beta: np.ndarray


def supinf_infsup_gap(
    f: BifunctionInstance,
    g: BifunctionInstance,
    resolution: float = COARSE_RESOLUTION,
    tol: float = DEFAULT_TOL,
    rounds: int = REFINE_ROUNDS,
) -> GapResult:
    """``alpha = sup_x inf_y g`` and ``beta = inf_y sup_x f`` on refined grids
    (exactly, by LP, when both are bilinear).

    Raises TheoremViolation when ``alpha < beta - tol``.
    """
    check_dominance(f, g, resolution, tol)
    if f.bilinear_matrix is not None and g.bilinear_matrix is not None:
        sg, sf = saddle_point(g, tol), saddle_point(f, tol)
        alpha, xa, beta, yb = sg.supinf, sg.x0, sf.infsup, sf.y0
    else:
        alpha, xa, _, _, _, _ = _extremize(g.values, g.X, g.Y, True, True, resolution, rounds)
        ft = lambda ys, xs: f.values(xs, ys).T
        beta, yb, _, _, _, _ = _extremize(ft, f.Y, f.X, False, False, resolution, rounds)
    if alpha < beta - tol:
        raise TheoremViolation("sup inf g < inf sup f", alpha=alpha, beta=beta)
    return GapResult(alpha, beta, xa, yb)


@dataclass
class SaddlePoint:
    x0: np.ndarray
    y0: np.ndarray
    value: float
    supinf: float
    infsup: float
    residual: float
    method: str


def solve_matrix_game(M):
    """Optimal mixed strategies of ``max_x min_y x'My`` over two simplices.

    Returns ``(x, y, row_value, col_value)``; the row LP maximizes the
    guaranteed payoff, the column LP minimizes the conceded one.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n, m = M.shape
    # row player: variables (x, v), maximize v s.t. v <= (M'x)_j
    res_r = solve_lp(
        np.concatenate([np.zeros(n), [-1.0]]),
        A_ub=np.hstack([-M.T, np.ones((m, 1))]),
        b_ub=np.zeros(m),
        A_eq=np.concatenate([np.ones(n), [0.0]])[None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * n + [(None, None)],
    )
    # column player: variables (y, w), minimize w s.t. (My)_i <= w
    res_c = solve_lp(
        np.concatenate([np.zeros(m), [1.0]]),
        A_ub=np.hstack([M, -np.ones((n, 1))]),
        b_ub=np.zeros(n),
        A_eq=np.concatenate([np.ones(m), [0.0]])[None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * m + [(None, None)],
    )
    if res_r.status != 0 or res_c.status != 0:
        raise RuntimeError("matrix game LP failed")
    x = np.clip(res_r.x[:n], 0.0, None)
    y = np.clip(res_c.x[:m], 0.0, None)
    return x / x.sum(), y / y.sum(), float(res_r.x[-1]), float(res_c.x[-1])


def saddle_point(
    inst: BifunctionInstance,
    tol: float = DEFAULT_TOL,
    resolution: float = COARSE_RESOLUTION,
    rounds: int = REFINE_ROUNDS,
) -> SaddlePoint:
    """Saddle point of ``f`` (x maximizes, y minimizes) on compact X, Y.

    Bilinear instances reduce to the matrix game ``V_X M V_Y'`` over weight
    simplices and are solved exactly by LP; others use refined grids and
    raise ResolutionInsufficient when the grid saddle inequalities fail.
    """
    if inst.bilinear_matrix is not None:
        VX, VY = inst.X.vertices, inst.Y.vertices
        game = VX @ inst.bilinear_matrix @ VY.T
        a, b, vr, vc = solve_matrix_game(game)
        x0, y0 = a @ VX, b @ VY
        value = float(a @ game @ b)
        residual = max(float(np.max(game @ b)) - value, value - float(np.min(game.T @ a)))
        return SaddlePoint(x0, y0, value, vr, vc, residual, "lp")
    _require(inst, "usc_in_x", "quasiconcave_in_x", "lsc_in_y", "quasiconvex_in_y")
    supinf, x0, _, Px, Py, _ = _extremize(inst.values, inst.X, inst.Y, True, True, resolution, rounds)
    ft = lambda ys, xs: inst.values(xs, ys).T
    infsup, y0, _, Qy, Qx, _ = _extremize(ft, inst.Y, inst.X, False, False, resolution, rounds)
    value = inst(x0, y0)
    xs = np.vstack([Px, Qx])
    ys = np.vstack([Py, Qy])
    up = float(np.max(inst.values(xs, y0))) - value
    down = value - float(np.min(inst.values(x0, ys)))
    residual = max(up, down)
    if residual > tol:
        raise ResolutionInsufficient("grid saddle inequalities fail", residual=residual, supinf=supinf, infsup=infsup)
    return SaddlePoint(x0, y0, value, supinf, infsup, residual, "grid")


def upper_section_fixed_point(inst: BifunctionInstance, lam: float, x) -> bool:
    """Is ``x`` in ``{y : f(x, y) > lam}``, i.e. a fixed point of the upper-section relation?"""
    return inst(x, x) > lam
