"""Certified computational convex analysis on polytopes.

Separation, intersection of convex families, finite KKM maps, minimax
alternatives, variational inequalities and affine fixed points, each returning
numerical witnesses together with their residuals.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .geometry import (
    DEFAULT_TOL, BarycentricCoords, Hyperplane, Polytope, Projection, barycentric_grid, contains, extreme_points,
    contains_many, distance, grid_points, linear_maximize, minkowski_difference, project,
)
from .separation import SeparationResult, common_point, separate_point, separate_sets
from .intersection import FamilyReport, UnionConvexity, check_ghouila_houri, find_common_point, subfamily_table
from .kkm import (
    FiniteKKMMap, KKMCertificate, SelectionMap, build_selection, intersection_residual, kkm_intersection,
    verify_kkm,
)
from .alternatives import (
    AlternativeOutcome, BifunctionInstance, GapResult, SaddlePoint, infsup_alternative, saddle_point,
    solve_matrix_game, supinf_infsup_gap, two_function_alternative, upper_section_fixed_point,
)
from .registry import make_bifunction, make_functional
from .vi import (
    BilinearForm, CoercivityBound, LinearFunctional, MinimizeResult, UnboundedDomain, VIResult,
    coercivity_bound, mazur_schauder_minimize, stampacchia_solve, vi_residual,
)
from .fixed_points import (
    AffineFamily, AffineMap, affine_fixed_point, common_fixed_point, dual_certificate,
    saddle_route_fixed_point,
)
from .kernels import BACKEND
