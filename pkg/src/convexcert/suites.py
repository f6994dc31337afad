"""Randomized verification suites, one per certified property.

Every suite draws its instances from seeded constructive generators, checks
the toolkit against independent oracles and returns a JSON-ready summary.
Trials use per-trial generators derived from ``(seed, suite, trial)`` so
results do not depend on execution order.
"""
import math
import zlib

import numpy as np

from . import generators as gen
from . import oracles
from .alternatives import saddle_point, supinf_infsup_gap
from .errors import ConvexCertError, InfeasibleIntersection
from .fixed_points import (
    AffineFamily, AffineMap, affine_fixed_point, common_fixed_point, dual_certificate,
    saddle_route_fixed_point,
)
from .geometry import Polytope, contains_many, distance, grid_points, linear_maximize, project
from .intersection import check_ghouila_houri, find_common_point, subfamily_table
from .kkm import FiniteKKMMap, build_selection, intersection_residual, kkm_intersection, verify_kkm
from .registry import bilinear, make_bifunction, quadratic_functional, sqrt_norm_functional
from .separation import separate_point, separate_sets
from .vi import BilinearForm, UnboundedDomain, coercivity_bound, mazur_schauder_minimize, stampacchia_solve, vi_gap_function


def _rng(seed, suite, trial):
    return np.random.default_rng([seed, zlib.crc32(suite.encode()), trial])


class _Tally:
    """Collects per-trial metrics and the first few failures."""

    def __init__(self):
        self.trials = 0
        self.failures = []
        self.metrics = {}

    def worst(self, key, value, larger_is_worse=True):
        value = float(value)
        old = self.metrics.get(key)
        if old is None or (value > old if larger_is_worse else value < old):
            self.metrics[key] = value

    def fail(self, trial, reason, **info):
        if len(self.failures) < 10:
            self.failures.append({"trial": trial, "reason": reason, **info})
        else:
            self.metrics["suppressed_failures"] = self.metrics.get("suppressed_failures", 0) + 1

    def report(self, **extra):
        return {
            "passed": not self.failures and "suppressed_failures" not in self.metrics,
            "trials": self.trials,
            "metrics": dict(sorted(self.metrics.items())),
            "failures": self.failures,
            **extra,
        }


def suite_point_separation(seed, trials, cfg):
    """Strict separation of random exterior points from random polytopes, dims 1..6."""
    t = _Tally()
    for dim in range(1, 7):
        for k in range(trials):
            rng = _rng(seed, f"point-separation/{dim}", k)
            P = gen.random_polytope(rng, dim)
            x = gen.exterior_point(rng, P)
            try:
                res = separate_point(P, x, cfg["tol"])
            except ConvexCertError as exc:
                t.fail(k, type(exc).__name__, dim=dim)
                continue
            t.trials += 1
            u, y = res.normal, res.witness_projection
            ux, uy = float(u @ x), float(u @ y)
            slack = float(np.min(uy - P.vertices @ u))
            t.worst("min_vertex_slack", slack, larger_is_worse=False)
            margin_err = abs(res.margin - float(u @ u))
            t.worst("max_margin_error", margin_err)
            t.worst("min_strict_gap", ux - uy, larger_is_worse=False)
            if slack < -1e-9 or not ux > uy or margin_err > 1e-7:
                t.fail(k, "separation chain", dim=dim, slack=slack, margin_error=margin_err)
    return t.report()


def suite_set_separation(seed, trials, cfg):
    """Separation of disjoint polytope pairs versus an independent distance oracle."""
    t = _Tally()
    for k in range(trials):
        rng = _rng(seed, "set-separation", k)
        dim = int(rng.integers(1, 7))
        K, C = gen.disjoint_pair(rng, dim)
        try:
            res = separate_sets(K, C, cfg["tol"])
        except ConvexCertError as exc:
            t.fail(k, type(exc).__name__)
            continue
        t.trials += 1
        u = res.normal
        chain = float(np.max(C.vertices @ u) + u @ u - np.min(K.vertices @ u))
        oracle = oracles.polytope_distance_sq(K.vertices, C.vertices)
        err = abs(res.margin - oracle)
        t.worst("max_chain_excess", chain)
        t.worst("max_margin_vs_oracle", err)
        if chain > 1e-7 or err > 1e-6:
            t.fail(k, "chain or margin", chain=chain, margin_error=err)
    return t.report()


def suite_simplex_faces(seed, trials, cfg):
    """Facets of the (n+1)-simplex: Helly-type hypothesis holds, intersection empty, union not convex."""
    t = _Tally()
    cases = []
    for n in range(1, 5):
        family = gen.simplex_faces(n)
        rep = check_ghouila_houri(family, 1 / 8, cfg["tol"], seed)
        t.trials += 1
        table = subfamily_table(family, cfg["tol"])
        loo = [table[s] is not None for s in table if len(s) == n + 1]
        uc = rep.union_convexity
        witness = None if uc.counter_witness is None else uc.counter_witness.tolist()
        ok = (
            len(family) == n + 2 and len(loo) == n + 2 and all(loo)
            and rep.full_intersection is None and rep.status == "union_not_convex"
            and uc.counter_witness is not None
        )
        cases.append({"n": n, "sets": len(family), "status": rep.status, "counter_witness": witness})
        if not ok:
            t.fail(n, "simplex faces", status=rep.status)
    return t.report(cases=cases)


def suite_kkm_star(seed, trials, cfg):
    """Star-shaped KKM maps around a planted point, dims 1..4."""
    t = _Tally()
    for dim in range(1, 5):
        for k in range(trials):
            rng = _rng(seed, f"kkm-star/{dim}", k)
            kmap, z = gen.star_kkm_map(rng, dim)
            cert = verify_kkm(kmap, cfg["resolution"], cfg["tol"])
            if not cert.certified:
                t.fail(k, "not certified", dim=dim)
                continue
            try:
                x = kkm_intersection(kmap, cfg["tol"])
            except InfeasibleIntersection:
                t.fail(k, "InfeasibleIntersection", dim=dim)
                continue
            t.trials += 1
            res = max(intersection_residual(kmap, x), distance(Polytope(kmap.domain_points), x))
            t.worst("max_residual", res)
            if res > 1e-7:
                t.fail(k, "residual", dim=dim, residual=res)
    return t.report()


def suite_kkm_barycentric(seed, trials, cfg):
    """Cells ``x_i >= 1/3`` of the 2-simplex meet exactly at the barycenter."""
    t = _Tally()
    kmap = gen.barycentric_kkm_map()
    cert = verify_kkm(kmap, cfg["resolution"], cfg["tol"])
    x = kkm_intersection(kmap, cfg["tol"])
    t.trials = 1
    err = float(np.max(np.abs(x - 1 / 3)))
    t.worst("max_error", err)
    if not cert.certified or err > 1e-6:
        t.fail(0, "barycenter", error=err, certified=cert.certified)
    return t.report(point=x.tolist())


def suite_selection(seed, trials, cfg):
    """Partition-of-unity selections on random ball covers."""
    t = _Tally()
    for k in range(trials):
        rng = _rng(seed, "selection", k)
        dim = int(rng.integers(1, 4))
        pts, balls, K = gen.ball_cover(rng, dim)
        try:
            sel = build_selection(pts, balls, K, cfg["resolution"])
        except ConvexCertError as exc:
            t.fail(k, type(exc).__name__)
            continue
        t.trials += 1
        G = grid_points(K, 1.0, max_points=1000, seed=k)
        if len(G) < 1000:
            G = np.vstack([G, rng.dirichlet(np.ones(K.n_vertices), 1000 - len(G)) @ K.vertices])
        W = sel.weights(G)
        inside = np.linalg.norm(G[:, None, :] - sel.centers[None], axis=2) < sel.radii[None]
        sub_bad = int(np.sum((W > 0) & ~inside))
        hull = Polytope(pts)
        S = sel.evaluate_many(G)
        outside = S[~contains_many(hull, S, 1e-12)]
        dev = max((distance(hull, s) for s in outside), default=0.0)
        t.worst("subordination_violations", sub_bad)
        t.worst("max_hull_distance", dev)
        if sub_bad or dev > 1e-9:
            t.fail(k, "selection", subordination_violations=sub_bad, hull_distance=dev)
    return t.report(grid_points=1000)


def suite_minimax(seed, trials, cfg):
    """Random matrix games against an independent LP, plus two symmetric games."""
    t = _Tally()
    for k in range(trials):
        rng = _rng(seed, "minimax", k)
        M = gen.random_game(rng, 10)
        n, m = M.shape
        inst = bilinear(Polytope(np.eye(n)), Polytope(np.eye(m)), M)
        sp = saddle_point(inst, cfg["tol"])
        t.trials += 1
        err = abs(sp.value - oracles.game_value(M))
        gap = abs(sp.supinf - sp.infsup)
        t.worst("max_value_error", err)
        t.worst("max_supinf_infsup_gap", gap)
        t.worst("max_saddle_residual", sp.residual)
        if err > 1e-6 or gap > 1e-6:
            t.fail(k, "game value", error=err, gap=gap)
    named = {
        "matching_pennies": [[1.0, -1.0], [-1.0, 1.0]],
        "rock_paper_scissors": [[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]],
    }
    values = {}
    for name, M in named.items():
        n = len(M)
        sp = saddle_point(bilinear(Polytope(np.eye(n)), Polytope(np.eye(n)), M), cfg["tol"])
        values[name] = sp.value
        t.trials += 1
        if abs(sp.value) > 1e-12:
            t.fail(name, "symmetric game value", value=sp.value)
    return t.report(symmetric_values=values)


def suite_shift_gap(seed, trials, cfg):
    """``sup inf g >= inf sup f`` when ``f <= g`` (here ``g = f + shift``)."""
    t = _Tally()
    for k in range(trials):
        rng = _rng(seed, "shift-gap", k)
        dim = int(rng.integers(1, 3))
        params, _, _ = gen.planted_saddle_pair(rng, dim)
        X = Polytope(gen_box(dim))
        shift = float(rng.uniform(0.0, 2.0))
        f = make_bifunction("quadratic", X, X, params)
        g = make_bifunction("quadratic", X, X, {**params, "c": params["c"] + shift})
        try:
            res = supinf_infsup_gap(f, g, 1 / 8, cfg["tol"])
        except ConvexCertError as exc:
            t.fail(k, type(exc).__name__)
            continue
        t.trials += 1
        t.worst("min_alpha_minus_beta", res.alpha - res.beta, larger_is_worse=False)
        t.worst("min_excess_over_shift", res.alpha - res.beta - shift, larger_is_worse=False)
        if res.alpha < res.beta - 1e-7:
            t.fail(k, "alpha < beta", alpha=res.alpha, beta=res.beta)
    return t.report()


def gen_box(dim):
    """Vertices of ``[-1, 1]^dim``."""
    return np.array(np.meshgrid(*[[-1.0, 1.0]] * dim, indexing="ij")).reshape(dim, -1).T


def suite_stampacchia(seed, trials, cfg):
    """Coercive VIs on random polytopes: residual, uniqueness, projection case and the norm bound."""
    t = _Tally()
    for k in range(trials):
        rng = _rng(seed, "stampacchia", k)
        dim = 1 + k % 6
        a, ell, X = gen.vi_instance(rng, dim)
        identity = k % 4 == 0
        if identity:
            a = BilinearForm(np.eye(dim), 1.0, 1.0)
        try:
            res = stampacchia_solve(a, ell, X, cfg["tol"], record=True, check_uniqueness=True)
        except ConvexCertError as exc:
            t.fail(k, type(exc).__name__)
            continue
        t.trials += 1
        t.worst("max_vi_residual", res.residual)
        t.worst("max_uniqueness_gap", res.uniqueness_gap)
        ok = res.residual <= 1e-8 and res.uniqueness_gap <= 1e-6
        if identity:
            err = float(np.linalg.norm(res.x - oracles.project_point(X.vertices, ell.vector)))
            t.worst("max_projection_error", err)
            ok &= err <= 1e-8
        y0 = X.vertices[int(np.argmin(np.linalg.norm(X.vertices, axis=1)))]
        bound = coercivity_bound(a.continuity_C, a.coercivity_alpha, ell.norm, float(np.linalg.norm(y0)))
        fired = [x for x in res.history if vi_gap_function(a, ell, x, y0) <= 0]
        excess = max((float(np.linalg.norm(x)) - bound.M for x in fired), default=-math.inf)
        t.worst("triggered_iterates", len(fired))
        if fired:
            t.worst("max_norm_minus_M", excess)
        ok &= excess <= 1e-9
        if not ok:
            t.fail(k, "vi", residual=res.residual, uniqueness_gap=res.uniqueness_gap, dim=dim)
    return t.report()


def suite_mazur_schauder(seed, trials, cfg):
    """Quasiconvex minimization: convex quadratics against a QP oracle, and a sqrt-norm case."""
    t = _Tally()
    for k in range(trials):
        rng = _rng(seed, "mazur-schauder", k)
        dim = int(rng.integers(1, 5))
        L = rng.normal(size=(dim, dim))
        Q = L @ L.T + 0.2 * np.eye(dim)
        c = rng.normal(size=dim) * 2
        X = gen.random_polytope(rng, dim)
        phi = quadratic_functional(Q, c)
        try:
            res = mazur_schauder_minimize(phi, X, cfg["tol"], seed=k)
        except ConvexCertError as exc:
            t.fail(k, type(exc).__name__)
            continue
        t.trials += 1
        ref = oracles.quadratic_min(Q, c, X.vertices)
        err = float(np.linalg.norm(res.xbar - ref))
        t.worst("max_point_error", err)
        t.worst("max_value_error", abs(res.value - phi(ref)))
        if err > 1e-6:
            t.fail(k, "qp mismatch", error=err)
    phi = sqrt_norm_functional()
    res = mazur_schauder_minimize(phi, UnboundedDomain(2, phi.radius, np.array([1.0, -1.0])), cfg["tol"], seed=seed % 2**32)
    t.trials += 1
    t.worst("sqrt_norm_value", res.value)
    if abs(res.value) > 1e-6:
        t.fail("sqrt-norm", "nonzero minimum", value=res.value)
    return t.report()


def suite_markov_kakutani(seed, trials, cfg):
    """Stationary distributions, commuting stochastic families and the saddle-route cross-check."""
    t = _Tally()
    for k in range(trials):
        rng = _rng(seed, "markov-kakutani", k)
        n = int(rng.integers(2, 7))
        T = gen.random_stochastic(rng, n)
        simplex = Polytope(np.eye(n))
        phi = AffineMap(T.T, np.zeros(n))
        try:
            x = affine_fixed_point(phi, simplex, cfg["tol"])
            fam = AffineFamily((phi, AffineMap(gen.stochastic_polynomial(rng, T).T, np.zeros(n))), simplex)
            xc = common_fixed_point(fam, cfg["tol"])
        except ConvexCertError as exc:
            t.fail(k, type(exc).__name__)
            continue
        t.trials += 1
        err = float(np.max(np.abs(x - oracles.stationary_distribution(T))))
        common = max(m.residual(xc) for m in fam.maps)
        cert = dual_certificate(phi, x)
        x0, value = saddle_route_fixed_point(phi, simplex)
        t.worst("max_eigen_error", err)
        t.worst("max_common_residual", common)
        t.worst("max_dual_certificate", cert)
        t.worst("max_saddle_route_value", abs(value))
        if err > 1e-6 or common > 1e-8 or cert > 1e-6 or abs(value) > 1e-6:
            t.fail(k, "fixed point", eigen_error=err, common_residual=common, dual=cert)
    return t.report()


def suite_klee_kkm(seed, trials, cfg):
    """Families with convex union and a common point become KKM maps by cyclic relabeling."""
    t = _Tally()
    for k in range(trials):
        rng = _rng(seed, "klee-kkm", k)
        dim = int(rng.integers(1, 4))
        family, _ = gen.klee_positive_family(rng, dim, dim + 1 + int(rng.integers(0, 3)))
        table = subfamily_table(family, cfg["tol"])
        n = len(family)
        loo = [table[tuple(j for j in range(n) if j != i)] for i in range(n)]
        if any(p is None for p in loo) or find_common_point(family, cfg["tol"]) is None:
            t.fail(k, "generator did not plant the hypotheses")
            continue
        ambient = Polytope(np.vstack([P.vertices for P in family]))
        kmap = FiniteKKMMap(np.array(loo), [family[(i + 1) % n] for i in range(n)], ambient)
        cert = verify_kkm(kmap, cfg["resolution"], cfg["tol"])
        t.trials += 1
        if not cert.certified:
            t.fail(k, "conversion not KKM", violation=None if cert.violation is None else cert.violation.tolist())
    return t.report()


SUITES = {
    "point-separation": (1, suite_point_separation, 500),
    "set-separation": (2, suite_set_separation, 300),
    "simplex-faces": (3, suite_simplex_faces, 1),
    "kkm-star": (4, suite_kkm_star, 100),
    "kkm-barycentric": (5, suite_kkm_barycentric, 1),
    "selection": (6, suite_selection, 50),
    "minimax": (7, suite_minimax, 100),
    "shift-gap": (8, suite_shift_gap, 50),
    "stampacchia": (9, suite_stampacchia, 100),
    "mazur-schauder": (10, suite_mazur_schauder, 30),
    "markov-kakutani": (11, suite_markov_kakutani, 50),
    "klee-kkm": (12, suite_klee_kkm, 100),
}


def run_suite(name, seed, cfg, trials=None):
    criterion, func, default = SUITES[name]
    n = default if trials is None else int(trials)
    out = func(seed, n, cfg)
    return {"suite": name, "criterion": criterion, **out}
