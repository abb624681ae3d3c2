"""Twisted Eisenstein series on Fuchsian groups.

Numerical toolkit for matrix-twisted Eisenstein series (twists unitary at the
cusps), their Fourier/Kloosterman expansions, the word-decomposition machinery
behind the convergence estimates, and automorphic integral kernel operators.
"""

__version__ = "0.1.0"

from .hyperbolic import (
    BoundaryPoint,
    GroupElement,
    PointH,
    frobenius_mu,
    hyperbolic_distance,
    imaginary_of_action,
    moebius_apply,
    moebius_boundary,
    point_pair_invariant,
)

__all__ = [
    "BoundaryPoint",
    "GroupElement",
    "PointH",
    "frobenius_mu",
    "hyperbolic_distance",
    "imaginary_of_action",
    "moebius_apply",
    "moebius_boundary",
    "point_pair_invariant",
    "__version__",
]
