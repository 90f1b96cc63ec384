"""Best approximation in finite-dimensional normed spaces.

Norms and their unit-ball geometry, closed sets with their oracles, the
distance function d_K and metric projection P_K, finite-difference
checks of d_K's derivative, and a scenario runner tying them together.
"""

__version__ = "0.1.0"

from .errors import BestApproxError  # noqa: E402
from .norms import Norm, norm_eval, norm_gradient  # noqa: E402
from .projection import (SolverConfig, best_approximations, chebyshev_verdict,  # noqa: E402
                         distance, minimizing_sequence)
from .sets import (FinitePointSet, NormBall, ParametricCurve, Polytope,  # noqa: E402
                   SublevelSet, UnionOf, set_from_spec, truncated_l1_hull)

__all__ = [
    "BestApproxError", "Norm", "norm_eval", "norm_gradient", "SolverConfig", "distance",
    "best_approximations", "chebyshev_verdict", "minimizing_sequence", "FinitePointSet",
    "NormBall", "ParametricCurve", "Polytope", "SublevelSet", "UnionOf", "set_from_spec",
    "truncated_l1_hull", "__version__",
]
