"""Shape-preserving (convex) approximation by algebras of functions.

Modules:

- ``geometry``: convex bodies, chords and sample grids
- ``funcexpr``: polynomial / exponential-polynomial expression trees
- ``convexity``: sampled convexity certificates and chord line minimization
- ``sgcore``: convex approximation through the canonical shape-generating set
- ``univariate``: one-variable convex approximants ``p_n(h(x))`` and Bernstein operators
- ``borsuk``: common chord-minimizer directions
- ``counterexample``: evidence that ``d`` generators are never enough
- ``cli``: JSON-driven command-line front end
"""
from .borsuk import CommonDirection, find_common_direction_2d, find_common_direction_heuristic
from .convexity import line_minimize, midpoint_convexity_test
from .counterexample import theorem1b_demo
from .funcexpr import AffineFunc, ExpPoly, Polynomial, sq_distance
from .geometry import Ball, Box, Polytope, chord
from .sgcore import assemble, canonical_sg_set
from .univariate import convex_exp_approx, exp_generator, prop3_pipeline

__all__ = [
    "AffineFunc",
    "Ball",
    "Box",
    "CommonDirection",
    "ExpPoly",
    "Polynomial",
    "Polytope",
    "assemble",
    "canonical_sg_set",
    "chord",
    "convex_exp_approx",
    "exp_generator",
    "find_common_direction_2d",
    "find_common_direction_heuristic",
    "line_minimize",
    "midpoint_convexity_test",
    "prop3_pipeline",
    "sq_distance",
    "theorem1b_demo",
]

__version__ = "0.1.0"
