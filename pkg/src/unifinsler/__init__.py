"""Finsler geometry of unitary groups at matrix scale.

Geodesics and the d_inf / d_p metrics on U(n), numerical convexity scans,
minimax circumcenters with certificates, and fixed-point solvers for
finite group actions (intertwiners, invariant projections).
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F403
from .errors import __all__ as _error_names
from .linalg import (TraceConvention, dagger, eigen_angles, exp_skew, log_unitary, op_norm,
                     schatten_norm, spectral_normal, trace, trace_inner)
from .metric import (BallSpec, Geodesic, d_2, d_inf, d_p, geodesic_between, in_ball, midpoint,
                     spectral_flow)
from .subspaces import (BallIntersection, ConvexHull, FixedPointSet, FullGroup, Grassmannian,
                        Orthogonal, SpecialUnitary, Subgroup, convex_hull_sample,
                        geodesic_closure_check, member, subspace_from_config)
from .convexity import (counterexample_flow, scan_dinf_convexity, scan_dp_convexity,
                        scan_strong_convexity_d2, scan_theta_extremes, strong_convexity_floor)
from .center import (CenterProblem, CenterResult, circumradius_upper, f_A, select_radius,
                     solve_center, verify_uniqueness)
from .rigidity import (FiniteGroupAction, find_fixed_point, find_intertwiner,
                       find_invariant_projection, orbit)
from .tolerances import Tolerances, default_tolerances

__all__ = [
    "__version__", "Tolerances", "default_tolerances",
    "TraceConvention", "dagger", "eigen_angles", "exp_skew", "log_unitary", "op_norm",
    "schatten_norm", "spectral_normal", "trace", "trace_inner",
    "BallSpec", "Geodesic", "d_2", "d_inf", "d_p", "geodesic_between", "in_ball", "midpoint",
    "spectral_flow",
    "BallIntersection", "ConvexHull", "FixedPointSet", "FullGroup", "Grassmannian", "Orthogonal",
    "SpecialUnitary", "Subgroup", "convex_hull_sample", "geodesic_closure_check", "member",
    "subspace_from_config",
    "counterexample_flow", "scan_dinf_convexity", "scan_dp_convexity", "scan_strong_convexity_d2",
    "scan_theta_extremes", "strong_convexity_floor",
    "CenterProblem", "CenterResult", "circumradius_upper", "f_A", "select_radius", "solve_center",
    "verify_uniqueness",
    "FiniteGroupAction", "find_fixed_point", "find_intertwiner", "find_invariant_projection", "orbit",
] + list(_error_names)
