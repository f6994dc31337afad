"""Seeded random instance generators.

Positive instances are built around a planted witness (common point, saddle,
fixed vector) so the ground truth is known independently of the solvers.
"""
import numpy as np

from .geometry import Polytope
from .kkm import FiniteKKMMap
from .vi import BilinearForm, LinearFunctional


def random_polytope(rng, dim, n_vertices=None):
    m = n_vertices or int(rng.integers(dim + 1, dim + 8))
    return Polytope(rng.normal(size=(m, dim)))


def exterior_point(rng, P: Polytope, gap=(0.05, 2.0)):
    """A point beyond the bounding sphere of P (centered at the vertex mean)."""
    c = P.barycenter
    R = float(np.max(np.linalg.norm(P.vertices - c, axis=1)))
    d = rng.normal(size=P.dim)
    d /= np.linalg.norm(d)
    return c + (R + rng.uniform(*gap)) * d


def disjoint_pair(rng, dim):
    """Two random polytopes, the second translated past both bounding spheres."""
    K = random_polytope(rng, dim)
    C0 = random_polytope(rng, dim)
    rk = float(np.max(np.linalg.norm(K.vertices - K.barycenter, axis=1)))
    rc = float(np.max(np.linalg.norm(C0.vertices - C0.barycenter, axis=1)))
    d = rng.normal(size=dim)
    d /= np.linalg.norm(d)
    shift = K.barycenter - C0.barycenter + (rk + rc + rng.uniform(0.05, 1.0)) * d
    return K, Polytope(C0.vertices + shift)


def simplex_faces(n):
    """The n+2 facets of the standard (n+1)-simplex in R^(n+2)."""
    E = np.eye(n + 2)
    return [Polytope(np.delete(E, i, axis=0)) for i in range(n + 2)]


def random_simplex(rng, dim):
    while True:
        V = rng.normal(size=(dim + 1, dim))
        if abs(np.linalg.det(V[1:] - V[0])) > 0.2:
            return V


def star_cells(vertices, zeta):
    """Max-ratio cells of a simplex around the interior point with weights ``zeta``.

    Cell ``i`` is ``{lam : lam_i / zeta_i >= lam_j / zeta_j}``; its vertices are
    the normalized restrictions of ``zeta`` to subsets containing ``i``. Every
    cell contains the planted point and the cells form a KKM map.
    """
    k = len(zeta)
    cells = []
    for i in range(k):
        pts = []
        others = [j for j in range(k) if j != i]
        for mask in range(1 << (k - 1)):
            T = [i] + [others[b] for b in range(k - 1) if mask >> b & 1]
            w = np.zeros(k)
            w[T] = zeta[T] / zeta[T].sum()
            pts.append(w @ vertices)
        cells.append(Polytope(np.array(pts)))
    return cells


def star_kkm_map(rng, dim):
    """KKM map on a random simplex with planted common point ``z``; returns ``(map, z)``."""
    V = random_simplex(rng, dim)
    zeta = rng.dirichlet(np.ones(dim + 1)) * 0.8 + 0.2 / (dim + 1)
    cells = star_cells(V, zeta)
    return FiniteKKMMap(V, cells, Polytope(V)), zeta @ V


def barycentric_kkm_map():
    """Cells ``{x in simplex : x_i >= 1/3}`` of the standard 2-simplex in R^3."""
    E = np.eye(3)
    t = 1.0 / 3.0
    vals = []
    for i in range(3):
        j, k = (a for a in range(3) if a != i)
        vals.append(Polytope([E[i], t * E[i] + 2 * t * E[j], t * E[i] + 2 * t * E[k]]))
    return FiniteKKMMap(E, vals, Polytope(E))


def klee_positive_family(rng, dim, n_members=None):
    """Family with a planted common point and convex union.

    Members are the cones from an interior point ``z`` over the facets of a
    random simplex (they cover it), plus optional extra sub-polytopes of the
    simplex containing ``z``. Returns ``(family, z)``.
    """
    V = random_simplex(rng, dim)
    zeta = rng.dirichlet(np.ones(dim + 1)) * 0.8 + 0.2 / (dim + 1)
    z = zeta @ V
    family = [Polytope(np.vstack([np.delete(V, i, axis=0), z])) for i in range(dim + 1)]
    extra = (n_members or len(family)) - len(family)
    for _ in range(max(0, extra)):
        W = rng.dirichlet(np.ones(dim + 1), size=dim + 1)
        family.append(Polytope(np.vstack([W @ V, z])))
    return family, z


def ball_cover(rng, dim, n_balls=None):
    """Random balls covering a random box-like polytope K; returns ``(points, balls, K)``."""
    K = Polytope(rng.uniform(-1, 1, size=(dim + 3, dim)))
    k = n_balls or int(rng.integers(2, 7))
    centers = rng.uniform(-1, 1, size=(k, dim))
    far = np.max(np.linalg.norm(K.vertices[:, None, :] - centers[None, :, :], axis=2), axis=0)
    radii = rng.uniform(0.4, 1.0, size=k) * far
    radii[int(np.argmin(far))] = far.min() * 1.05 + 1e-3
    points = rng.normal(size=(k, dim))
    return points, list(zip(centers, radii)), K


def random_game(rng, max_size=10):
    n, m = rng.integers(2, max_size + 1, size=2)
    return rng.uniform(-1, 1, size=(n, m))


def planted_saddle_pair(rng, dim=2, k=8):
    """Concave-convex quadratic on ``[-1,1]^dim`` squares with saddle at grid points.

    Returns the ``quadratic`` registry parameters and the planted ``(a, b)``.
    """
    a = rng.integers(-k, k + 1, size=dim) / k
    b = rng.integers(-k, k + 1, size=dim) / k
    B = 0.3 * rng.uniform(-1, 1, size=(dim, dim))
    I = np.eye(dim)
    # -|x-a|^2 + |y-b|^2 + (x-a)'B(y-b), expanded into quadratic form coefficients
    params = {
        "P": -2 * I, "Q": 2 * I, "B": B,
        "p": 2 * a - B @ b, "q": -2 * b - B.T @ a,
        "c": float(-a @ a + b @ b + a @ B @ b),
    }
    return params, a, b


def coercive_form(rng, dim):
    """Random coercive matrix with alpha/C bounded away from zero."""
    S = rng.normal(size=(dim, dim))
    skew = 0.5 * (S - S.T) * rng.uniform(0, 0.6)
    L = rng.normal(size=(dim, dim)) * 0.3
    A = np.eye(dim) * rng.uniform(0.5, 2.0) + L @ L.T + skew
    return BilinearForm.from_matrix(A)


def vi_instance(rng, dim):
    a = coercive_form(rng, dim)
    ell = LinearFunctional(rng.normal(size=dim) * 2)
    X = Polytope(rng.uniform(-1, 1, size=(int(rng.integers(dim + 1, dim + 6)), dim)))
    return a, ell, X


def random_stochastic(rng, n):
    T = rng.uniform(0.05, 1.0, size=(n, n))
    return T / T.sum(axis=1, keepdims=True)


def stochastic_polynomial(rng, T, degree=3):
    """Convex combination of powers of T (stochastic, commutes with T)."""
    c = rng.dirichlet(np.ones(degree + 1))
    n = len(T)
    out = np.zeros((n, n))
    Tk = np.eye(n)
    for ck in c:
        out += ck * Tk
        Tk = Tk @ T
    return out
