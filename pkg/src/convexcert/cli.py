"""Command-line front end: JSON instances in, JSON reports out.

Exit codes: 0 certified success, 2 valid negative outcome (the toolkit found a
certificate that the hoped-for conclusion fails), 1 error, 64 malformed JSON,
65 dimension mismatch. A report is written in every case.
"""
import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .alternatives import (
    BifunctionInstance, infsup_alternative, saddle_point, two_function_alternative,
)
from .errors import (
    ConvexCertError, DimensionMismatch, InfeasibleIntersection, PointInsideSet, SetsIntersect,
)
from .fixed_points import AffineFamily, AffineMap, affine_fixed_point, common_fixed_point
from .geometry import Polytope
from .intersection import check_ghouila_houri
from .kkm import FiniteKKMMap, kkm_intersection, verify_kkm
from .registry import bilinear, make_bifunction, make_functional
from .separation import separate_point, separate_sets
from .suites import SUITES, run_suite
from .vi import BilinearForm, LinearFunctional, UnboundedDomain, mazur_schauder_minimize, stampacchia_solve

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2
EXIT_BAD_JSON, EXIT_DIMENSION = 64, 65
TOL_ENV = "CONVEXCERT_TOL"


class MalformedInput(Exception):
    def __init__(self, path, exc: json.JSONDecodeError):
        super().__init__(f"{path}: {exc.msg} at line {exc.lineno} column {exc.colno} (char {exc.pos})")
        self.details = {"file": str(path), "line": exc.lineno, "column": exc.colno, "position": exc.pos}


class Negative(Exception):
    """A valid outcome that certifies the negative side; carries the report payload."""

    def __init__(self, outcome):
        super().__init__("negative outcome")
        self.outcome = outcome


@dataclass
class RunConfig:
    seed: int = 0
    tol: float = 1e-9
    resolution: float = 1 / 16
    trial_counts: dict = field(default_factory=dict)
    output_path: str = "-"

    def __post_init__(self):
        self.seed = int(self.seed)
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.tol = float(self.tol)
        self.resolution = float(self.resolution)
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.resolution <= 1:
            raise ValueError("resolution must lie in (0, 1]")
        unknown = set(self.trial_counts) - set(SUITES)
        if unknown:
            raise ValueError(f"unknown suites in trial_counts: {sorted(unknown)}")
        self.trial_counts = {k: int(v) for k, v in sorted(self.trial_counts.items())}


# ---------------------------------------------------------------- JSON output

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _emit(obj, indent=0):
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_emit(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent + 1) for v in obj) + "\n" + "  " * indent + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj):
            return '"nan"'
        if math.isinf(obj):
            return '"inf"' if obj > 0 else '"-inf"'
        text = format(obj, ".17g")
        return text if any(c in text for c in ".en") else text + ".0"
    return json.dumps(str(obj))


def dumps(obj) -> str:
    """Deterministic JSON with every real written to 17 significant digits."""
    return _emit(_plain(obj)) + "\n"


def _write(report, path):
    text = dumps(report)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------- JSON input

def load_json(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        return json.loads(raw.decode("utf-8")), hashlib.sha256(raw).hexdigest()
    except json.JSONDecodeError as exc:
        raise MalformedInput(path, exc) from None


def _polytope(obj):
    if isinstance(obj, dict):
        obj = obj["vertices"]
    return Polytope(np.asarray(obj, dtype=float))


def _matrix(obj):
    M = np.asarray(obj, dtype=float)
    return M.reshape(1, 1) if M.ndim == 0 else np.atleast_2d(M)


def _box(dim):
    return Polytope(np.array(np.meshgrid(*[[-1.0, 1.0]] * dim, indexing="ij")).reshape(dim, -1).T)


def _game(doc):
    M = _matrix(doc["matrix"])
    n, m = M.shape
    if doc.get("row_simplex", n) != n or doc.get("col_simplex", m) != m:
        raise DimensionMismatch("simplex sizes disagree with the matrix shape", shape=[n, m])
    return bilinear(Polytope(np.eye(n)), Polytope(np.eye(m)), M)


def _bifunction(spec, X, Y):
    return make_bifunction(spec["name"], X, Y, spec.get("params"))


def _instance(doc):
    """Matrix game or a named registry bifunction; returns ``(f, g)``."""
    if "matrix" in doc:
        f = _game(doc)
        return f, f
    X = _polytope(doc["X"])
    Y = _polytope(doc.get("Y", doc["X"]))
    f = _bifunction(doc["bifunction"], X, Y)
    g = _bifunction(doc["g"], X, Y) if "g" in doc else None
    return f, g


# ---------------------------------------------------------------- subcommands

def _separate(args, cfg):
    C, digest_c = load_json(args.set)
    C = _polytope(C)
    if (args.point is None) == (args.other is None):
        raise ValueError("give exactly one of --point or --other")
    if args.point is not None:
        x, digest = load_json(args.point)
        try:
            res = separate_point(C, np.asarray(x, dtype=float), cfg.tol)
        except PointInsideSet as exc:
            raise Negative({"inside": True, **exc.details}) from None
        target = {"point": x}
    else:
        K, digest = load_json(args.other)
        try:
            res = separate_sets(_polytope(K), C, cfg.tol)
        except SetsIntersect as exc:
            raise Negative({"intersect": True, **exc.details}) from None
        target = {}
    return {
        **target,
        "u": res.normal,
        "y": res.witness_projection,
        "offset": res.hyperplane.offset,
        "margin": res.margin,
        "vertex_slack": res.vertex_slack,
        "weak": res.weak,
    }, [digest_c, digest]


def _klee_check(args, cfg):
    doc, digest = load_json(args.family)
    family = [_polytope(p) for p in doc["polytopes"]]
    res = doc.get("resolution", args.resolution or 1 / 8)
    rep = check_ghouila_houri(family, res, cfg.tol, cfg.seed)
    uc = rep.union_convexity
    outcome = {
        "status": rep.status,
        "sets": len(family),
        "hypothesis_ii": rep.hypothesis_ii,
        "full_intersection": rep.full_intersection,
        "subfamilies": [
            {"indices": list(k), "point": v} for k, v in sorted(rep.subfamily_intersections.items())
        ],
        "union_convexity": None if uc is None else {
            "certified_at_resolution": uc.certified_at_resolution,
            "counter_witness": uc.counter_witness,
            "pair": uc.pair,
            "pairs_checked": uc.pairs_checked,
        },
        "notes": rep.notes,
    }
    if rep.status != "common_point":
        raise Negative(outcome)
    return outcome, [digest]


def _kkm_verify(args, cfg):
    doc, digest = load_json(args.instance)
    kmap = FiniteKKMMap(
        np.asarray(doc["domain_points"], dtype=float),
        [_polytope(v) for v in doc["values"]],
        _polytope(doc["ambient"]),
    )
    res = float(doc.get("resolution", cfg.resolution))
    cert = verify_kkm(kmap, res, cfg.tol)
    outcome = {
        "certified": cert.certified,
        "resolution": cert.resolution,
        "checked_points": cert.checked_points,
        "violation": None if cert.violation is None else {
            "subset": list(cert.violation[0]), "point": cert.violation[1],
        },
    }
    try:
        x = kkm_intersection(kmap, cfg.tol)
        outcome["intersection"] = x
    except InfeasibleIntersection as exc:
        outcome["intersection"] = None
        outcome["infeasibility"] = exc.details
        raise Negative(outcome) from None
    if not cert.certified:
        raise Negative(outcome)
    return outcome, [digest]


def _alternative(args, cfg):
    doc, digest = load_json(args.instance)
    lam = float(doc["lam"] if args.lam is None else args.lam)
    f, g = _instance(doc)
    res = float(doc.get("resolution", 1 / 8))
    if g is None:
        out = infsup_alternative(f, lam, res, cfg.tol, seed=cfg.seed)
        kind = "infsup"
    else:
        out = two_function_alternative(f, g, lam, res, cfg.tol)
        kind = "two_function"
    return {"form": kind, "lam": lam, "branch": out.branch, "witness": out.witness, "certificate": out.certificate}, [digest]


def _minimax(args, cfg):
    doc, digest = load_json(args.instance)
    f, _ = _instance(doc)
    sp = saddle_point(f, cfg.tol, float(doc.get("resolution", 1 / 8)))
    return {
        "x0": sp.x0, "y0": sp.y0, "value": sp.value, "supinf": sp.supinf, "infsup": sp.infsup,
        "residual": sp.residual, "method": sp.method,
    }, [digest]


def _vi_solve(args, cfg):
    doc, digest = load_json(args.instance)
    A = _matrix(doc["A"])
    ell = LinearFunctional(np.asarray(doc["ell"], dtype=float))
    X = _polytope(doc["X"])
    if A.shape != (X.dim, X.dim) or ell.vector.size != X.dim:
        raise DimensionMismatch("A, ell and X must share a dimension", A=list(A.shape), ell=ell.vector.size, X=X.dim)
    res = stampacchia_solve(BilinearForm.from_matrix(A), ell, X, float(doc.get("tol", cfg.tol)), check_uniqueness=True)
    return {
        "x": res.x, "residual": res.residual, "iterations": res.iterations, "q": res.q, "rho": res.rho,
        "uniqueness_gap": res.uniqueness_gap,
    }, [digest]


def _minimize(args, cfg):
    doc, digest = load_json(args.instance)
    spec = doc["functional"]
    phi = make_functional(spec["name"], spec.get("params"))
    if doc.get("X") is not None:
        X = _polytope(doc["X"])
    else:
        X = UnboundedDomain(int(doc["dim"]), phi.radius, None if "anchor" not in doc else np.asarray(doc["anchor"], float))
    res = mazur_schauder_minimize(phi, X, cfg.tol, seed=cfg.seed % 2**32)
    return {"xbar": res.xbar, "value": res.value, "domain_vertices": res.domain.vertices, "evaluations": res.evaluations}, [digest]


def _fixed_point(args, cfg):
    doc, digest = load_json(args.instance)
    X = _polytope(doc["X"])
    maps = [AffineMap(_matrix(m["A"]), np.asarray(m.get("b", np.zeros(X.dim)), dtype=float)) for m in doc["maps"]]
    for phi in maps:
        if phi.dim != X.dim:
            raise DimensionMismatch("map and domain differ in dimension", map=phi.dim, X=X.dim)
    if len(maps) == 1:
        x = affine_fixed_point(maps[0], X, cfg.tol)
    else:
        x = common_fixed_point(AffineFamily(tuple(maps), X), cfg.tol)
    return {"x": x, "residuals": [phi.residual(x) for phi in maps]}, [digest]


def _suite_job(job):
    name, seed, cfg_dict, trials = job
    return run_suite(name, seed, cfg_dict, trials)


def _verify_suite(args, cfg):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in SUITES:
        raise ValueError(f"unknown suite {args.suite!r}; choose from {['all', *SUITES]}")
    knobs = {"tol": cfg.tol, "resolution": cfg.resolution}
    jobs = [(n, cfg.seed, knobs, cfg.trial_counts.get(n)) for n in names]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_suite_job, jobs))
    else:
        results = [_suite_job(j) for j in jobs]
    results.sort(key=lambda r: r["criterion"])
    passed = all(r["passed"] for r in results)
    outcome = {"passed": passed, "suites": results}
    if not passed:
        raise ConvexCertError("verification suite failed", **outcome)
    return outcome, []


COMMANDS = {
    "separate": _separate,
    "klee-check": _klee_check,
    "kkm-verify": _kkm_verify,
    "alternative": _alternative,
    "minimax": _minimax,
    "vi-solve": _vi_solve,
    "minimize": _minimize,
    "fixed-point": _fixed_point,
    "verify-suite": _verify_suite,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; explicit flags take precedence")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--resolution", type=float)
    common.add_argument("--output", "-o", help="report path (default: stdout)")
    common.add_argument("--timing", action="store_true", help="add wall-clock timing to the report")

    parser = argparse.ArgumentParser(prog="convexcert", description="Certified computations on convex polytopes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("separate", parents=[common], help="separate a point or a polytope from a polytope")
    p.add_argument("--set", required=True, help="polytope JSON")
    p.add_argument("--point", help="vector JSON")
    p.add_argument("--other", help="second polytope JSON (set-set separation)")

    p = sub.add_parser("klee-check", parents=[common], help="intersection and union-convexity check of a family")
    p.add_argument("--family", required=True)

    for name, helptext in [
        ("kkm-verify", "verify a finite KKM map and find a common point"),
        ("alternative", "decide a minimax alternative at level lam"),
        ("minimax", "saddle point of a bifunction or matrix game"),
        ("vi-solve", "solve a coercive variational inequality"),
        ("minimize", "minimize a registered quasiconvex functional"),
        ("fixed-point", "fixed point of one affine map or a commuting family"),
    ]:
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--instance", "-i", required=True)
        if name == "alternative":
            p.add_argument("--lam", type=float)

    p = sub.add_parser("verify-suite", parents=[common], help="run randomized verification suites")
    p.add_argument("--suite", default="all", help=f"one of: all, {', '.join(SUITES)}")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--trials", action="append", default=[], metavar="SUITE=N", help="override a suite's trial count")
    return parser


def make_config(args) -> RunConfig:
    values = {}
    if os.environ.get(TOL_ENV):
        values["tol"] = float(os.environ[TOL_ENV])
    if args.config:
        doc, _ = load_json(args.config)
        if not isinstance(doc, dict):
            raise ValueError("config file must hold a JSON object")
        values.update(doc)
    for key in ("seed", "tol", "resolution"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    counts = dict(values.get("trial_counts", {}))
    for item in getattr(args, "trials", []):
        name, _, n = item.partition("=")
        counts[name] = int(n)
    values["trial_counts"] = counts
    if args.output is not None:
        values["output_path"] = args.output
    return RunConfig(**values)


def dispatch(argv=None) -> int:
    args = build_parser().parse_args(argv)
    report = {"toolkit": "convexcert", "version": __version__, "command": args.command}
    out_path = args.output
    start = time.perf_counter()
    try:
        cfg = make_config(args)
        out_path = cfg.output_path
        report["config"] = asdict(cfg)
        outcome, digests = COMMANDS[args.command](args, cfg)
        report["instance_sha256"] = digests
        report["status"] = "ok"
        report["outcome"] = outcome
        code = EXIT_OK
    except Negative as neg:
        report["status"] = "negative"
        report["outcome"] = neg.outcome
        code = EXIT_NEGATIVE
    except MalformedInput as exc:
        report["status"] = "error"
        report["error"] = {"type": "MalformedJSON", "message": str(exc), **exc.details}
        code = EXIT_BAD_JSON
    except DimensionMismatch as exc:
        report["status"] = "error"
        report["error"] = {"type": "DimensionMismatch", "message": str(exc), "details": exc.details}
        code = EXIT_DIMENSION
    except ConvexCertError as exc:
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc), "details": exc.details}
        code = EXIT_ERROR
    except (OSError, KeyError, TypeError, ValueError, RuntimeError) as exc:
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = EXIT_ERROR
    report["exit_code"] = code
    if args.timing:
        report["timing_seconds"] = time.perf_counter() - start
    _write(report, out_path)
    return code


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
