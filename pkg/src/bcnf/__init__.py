"""Dynamics of the planar border-collision normal form with a degenerate piece.

Subpackages cover the map itself (:mod:`bcnf.core`), orbit classification
(:mod:`bcnf.classify`), bifurcation-curve formulas and tracing
(:mod:`bcnf.curves`), two-parameter sweeps (:mod:`bcnf.sweep`), and the two
application pipelines (:mod:`bcnf.filippov`, :mod:`bcnf.flu`).
"""

from .core import NormalFormParams, SkewTentParams, orbit, skew_tent_step, solve_cycle, step

__version__ = "0.1.0"

__all__ = [
    "NormalFormParams",
    "SkewTentParams",
    "step",
    "orbit",
    "skew_tent_step",
    "solve_cycle",
    "__version__",
]
