"""Fourth-order compact finite differences on curved 2D domains.

Solves ``-div(alpha grad u) + beta . grad u + kappa u = phi`` with Dirichlet
data on domains bounded by smooth parametric curves, using a uniform
Cartesian grid: a 9-point compact stencil at regular centers and a
boundary-anchored compact stencil at irregular ones.
"""

from .assembler import SolutionField, SparseSystem, apply_operator, assemble, solve
from .catalog import get_problem, problem_names
from .geometry import Domain, ExpressionCurve, RadialCurve, radial_leaf
from .grid import Grid, NodeClass, build_grid, support_set
from .harness import ConvergenceReport, RunConfig, error_norms, report_orders, run_convergence
from .problem import CoefficientFields, ProblemSpec, make_manufactured

__all__ = [
    "CoefficientFields", "ConvergenceReport", "Domain", "ExpressionCurve", "Grid", "NodeClass",
    "ProblemSpec", "RadialCurve", "RunConfig", "SolutionField", "SparseSystem",
    "apply_operator", "assemble", "build_grid", "error_norms", "get_problem",
    "make_manufactured", "problem_names", "radial_leaf", "report_orders", "run_convergence",
    "solve", "support_set",
]
__version__ = "0.1.0"
