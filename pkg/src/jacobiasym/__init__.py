"""Asymptotic evaluation of generalized Jacobi-type orthogonal polynomials.

Weights w(x) = (1-x)^alpha (1+x)^beta h(x) on [-1, 1]; per-point cost of
evaluating pi_n, p_n, derivatives and recurrence data is independent of
the degree n, and Gauss rules cost O(n).
"""

from .branches import Side
from .contours import AuxData, ContourParams
from .coeffs import CoeffTable
from .evaluate import Engine, EvalResult, RegionTag
from .quadrature import QuadRule, gauss_rule, moments_check, timing_profile
from .weights import (HExpEvenPower, HExpLinear, HGeneric, HLinearFactors,
                      HOne, WeightSpec, format_weight, parse_weight)

__all__ = [
    "Side", "AuxData", "ContourParams", "CoeffTable",
    "Engine", "EvalResult", "RegionTag",
    "QuadRule", "gauss_rule", "moments_check", "timing_profile",
    "WeightSpec", "HOne", "HExpEvenPower", "HExpLinear", "HLinearFactors",
    "HGeneric", "parse_weight", "format_weight",
]

__version__ = "0.1.0"
