"""lamprobe: verification and search toolkit for laminates of
matrix-valued probability measures.

The package verifies the explicit constructions of a tau-parametrized
family of 2x2 gradient measures (and its 3x2 companion), and provides the
machinery to probe lamination reachability: exact transport distances,
bounded branch-and-bound decomposition search, weight-polytope feasibility
on fixed supports, and LP-driven searches for cone-convex separating
polynomials.
"""

from .chart import (Chart, Cone, Coords, c_grid, cone_family, in_cone,
                    normal_of, parse_chart, parse_cone)
from .laminate import (LaminateTree, SplitNode, flatten, jensen_gap, leaf,
                       split, validate)
from .matcore import (Matrix, RankOneFactors, det2, rank_class,
                      rank_one_factor, rank_one_test)
from .measure import (Atom, DiscreteMeasure, barycenter, distance, integrate,
                      project_row)
from .scenarios import (build_3x2, build_mu_tau_tree, build_nu0_tree,
                        build_nu_bar_tau, build_nu_tau, mu_weights,
                        nu0_measure)
from .search import (LaminationPolytope, SearchConfig, SearchResult,
                     proper_directions, search, sweep, weight_polytope)
from .separator import (Certificate, PolyFunc, SeparatorConfig,
                        convexity_violation, separate, verify_certificate)

__version__ = "0.1.0"

__all__ = [
    "Atom", "Certificate", "Chart", "Cone", "Coords", "DiscreteMeasure",
    "LaminateTree", "LaminationPolytope", "Matrix", "PolyFunc",
    "RankOneFactors", "SearchConfig", "SearchResult", "SeparatorConfig",
    "SplitNode", "barycenter", "build_3x2", "build_mu_tau_tree",
    "build_nu0_tree", "build_nu_bar_tau", "build_nu_tau", "c_grid",
    "cone_family", "convexity_violation", "det2", "distance", "flatten",
    "in_cone", "integrate", "jensen_gap", "leaf", "mu_weights",
    "normal_of", "nu0_measure", "parse_chart", "parse_cone",
    "project_row", "proper_directions", "rank_class", "rank_one_factor",
    "rank_one_test", "search", "separate", "split", "sweep", "validate",
    "verify_certificate", "weight_polytope",
]
