"""Weight functions w(x) = (1-x)^alpha (1+x)^beta h(x) on [-1, 1].

The analytic factor h is restricted to a closed grammar (constant,
exp(-c x^(2m)), exp(-t x), products of linear factors (x - r)^p) plus a
generic escape hatch taking a user-supplied analytic log h.  For each
variant, log h is continued structurally off the interval, never as
log(h(z)), so the continuation stays on the correct branch.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import branches
from .branches import Side
from .errors import OutsideAnalyticRegion, PoleAtEndpoint, WeightDomainError

__all__ = [
    "HOne",
    "HExpEvenPower",
    "HExpLinear",
    "HLinearFactors",
    "HGeneric",
    "WeightSpec",
    "eval_h",
    "eval_logh",
    "eval_dlogh",
    "eval_w",
    "is_entire_logh",
    "is_even_h",
    "rho_max",
    "check_positive_real_part",
    "parse_weight",
    "format_weight",
]


@dataclass(frozen=True)
class HOne:
    """h(x) = 1 (classical Jacobi weight)."""


@dataclass(frozen=True)
class HExpEvenPower:
    """h(x) = exp(-c x^(2m)); log h entire."""

    c: float
    m: int

    def __post_init__(self):
        if self.m < 1 or int(self.m) != self.m:
            raise WeightDomainError("even-power exponent m must be a positive integer")


@dataclass(frozen=True)
class HExpLinear:
    """h(x) = exp(-t x); log h entire."""

    t: float


@dataclass(frozen=True)
class HLinearFactors:
    """h(x) = scale * prod_i (x - r_i)^(p_i) with every root off [-1, 1]."""

    factors: tuple[tuple[complex, float], ...]
    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0:
            raise WeightDomainError("scale must be positive")
        for root, _ in self.factors:
            r = complex(root)
            if r.imag == 0.0 and -1.0 <= r.real <= 1.0:
                raise WeightDomainError(f"root {r} lies on [-1, 1]")


@dataclass(frozen=True)
class HGeneric:
    """User-supplied analytic log h with a user-asserted Bernstein radius."""

    logh: Callable = field(compare=False)
    rho: float = 1.0
    dlogh: Callable | None = field(default=None, compare=False)


HSpec = HOne | HExpEvenPower | HExpLinear | HLinearFactors | HGeneric


@dataclass(frozen=True)
class WeightSpec:
    """Orthogonality weight (1-x)^alpha (1+x)^beta h(x), alpha, beta > -1."""

    alpha: float
    beta: float
    h: HSpec = HOne()

    def __post_init__(self):
        if not (self.alpha > -1.0 and self.beta > -1.0):
            raise WeightDomainError("alpha and beta must both exceed -1")


def rho_max(spec: WeightSpec) -> float:
    """Largest admissible Bernstein-ellipse parameter for contours."""
    h = spec.h
    if isinstance(h, (HOne, HExpEvenPower, HExpLinear)):
        return math.inf
    if isinstance(h, HLinearFactors):
        if not h.factors:
            return math.inf
        return min(float(branches.bernstein_rho(complex(r))) for r, _ in h.factors)
    return float(h.rho)


def is_entire_logh(spec: WeightSpec) -> bool:
    """True exactly when log h continues to an entire function."""
    return isinstance(spec.h, (HOne, HExpEvenPower, HExpLinear))


def is_even_h(spec: WeightSpec) -> bool:
    """Detect h(-z) = h(z); implies d_n = (-1)^(n+1) c_n downstream."""
    h = spec.h
    if isinstance(h, (HOne, HExpEvenPower)):
        return True
    if isinstance(h, HExpLinear):
        return h.t == 0.0
    if isinstance(h, HLinearFactors):
        pairs = {(complex(r), float(p)) for r, p in h.factors}
        return all((-r, p) in pairs for r, p in pairs)
    return False


def _log_factor(z, root):
    """Branch of log(z - root) real-compatible with [-1, 1], cut away from it."""
    r = complex(root)
    # star-shaped ellipses about 0 never meet the ray {t*r : t >= 1}, so the
    # principal log of (1 - z/r) is safe; the constant fixes the value at 0.
    return np.log1p(-z / r) + np.log(-r + 0j)


def eval_logh(spec: WeightSpec, z, check_region: bool = True):
    """Structural analytic continuation of log h from [-1, 1]."""
    zc = np.asarray(z, dtype=complex)
    h = spec.h
    if check_region and not is_entire_logh(spec):
        rho = rho_max(spec)
        if np.any(branches.bernstein_rho(zc) >= rho):
            raise OutsideAnalyticRegion(
                f"point outside the analyticity ellipse (rho_max = {rho:.6g})"
            )
    if isinstance(h, HOne):
        return np.zeros_like(zc)
    if isinstance(h, HExpEvenPower):
        return -h.c * zc ** (2 * h.m)
    if isinstance(h, HExpLinear):
        return -h.t * zc
    if isinstance(h, HLinearFactors):
        out = np.full_like(zc, math.log(h.scale))
        for r, p in h.factors:
            out = out + p * _log_factor(zc, r)
        return out
    return np.asarray(h.logh(zc), dtype=complex)


def eval_dlogh(spec: WeightSpec, z):
    """d/dz of the continued log h."""
    zc = np.asarray(z, dtype=complex)
    h = spec.h
    if isinstance(h, HOne):
        return np.zeros_like(zc)
    if isinstance(h, HExpEvenPower):
        return -2 * h.m * h.c * zc ** (2 * h.m - 1)
    if isinstance(h, HExpLinear):
        return np.full_like(zc, -h.t)
    if isinstance(h, HLinearFactors):
        out = np.zeros_like(zc)
        for r, p in h.factors:
            out = out + p / (zc - complex(r))
        return out
    if h.dlogh is not None:
        return np.asarray(h.dlogh(zc), dtype=complex)
    eps = 1e-6
    return (eval_logh(spec, zc + eps, check_region=False)
            - eval_logh(spec, zc - eps, check_region=False)) / (2 * eps)


def eval_h(spec: WeightSpec, z):
    """h(z) via exp of the structural log h."""
    return np.exp(eval_logh(spec, z, check_region=False))


def eval_w(spec: WeightSpec, z, side: Side = Side.PRINCIPAL):
    """(1-z)^alpha (1+z)^beta h(z) with principal-branch endpoint powers."""
    zc, mask = branches._normalize(z, side)
    at_right = zc == 1.0
    at_left = zc == -1.0
    if (spec.alpha < 0 and np.any(at_right)) or (spec.beta < 0 and np.any(at_left)):
        raise PoleAtEndpoint("weight has a pole at an endpoint with negative exponent")
    val = (branches.one_minus(zc) ** spec.alpha * (1.0 + zc) ** spec.beta
           * eval_h(spec, zc))
    return branches._apply_side(val, mask, side)


def check_positive_real_part(spec: WeightSpec, rho: float, n_samples: int = 256) -> None:
    """Abort loudly if Re h fails strict positivity on the E_rho boundary."""
    t = np.linspace(0.0, 2 * np.pi, n_samples, endpoint=False)
    zeta = 0.5 * (rho * np.exp(1j * t) + np.exp(-1j * t) / rho)
    vals = eval_h(spec, zeta)
    worst = float(np.min(vals.real))
    if worst <= 0.0:
        raise WeightDomainError(
            f"Re h <= 0 on the Bernstein ellipse rho = {rho:.6g} (min = {worst:.3g}); "
            "shrink rho or fix the weight"
        )


# ---------------------------------------------------------------------------
# text form: jacobi(alpha, beta) * <h-expr>

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_JACOBI_RE = re.compile(rf"^jacobi\(\s*({_NUM})\s*,\s*({_NUM})\s*\)\s*(?:\*\s*(.+))?$")
_EXP_POW_RE = re.compile(rf"^exp\(\s*-\s*({_NUM})\s*\*\s*x\s*\^\s*\(?\s*(\d+)\s*\)?\s*\)$")
_EXP_LIN_RE = re.compile(rf"^exp\(\s*-\s*({_NUM})\s*\*\s*x\s*\)$")
_FACTOR_RE = re.compile(
    rf"^\(\s*x\s*([-+])\s*({_NUM})\s*\)(?:\s*\^\s*\(?\s*({_NUM})\s*\)?)?$"
)


def parse_weight(text: str) -> WeightSpec:
    """Parse the textual form `jacobi(alpha, beta) * <h-expr>`."""
    m = _JACOBI_RE.match(text.strip())
    if m is None:
        raise ValueError(f"cannot parse weight spec: {text!r}")
    alpha, beta = float(m.group(1)), float(m.group(2))
    hexpr = (m.group(3) or "1").strip()
    if hexpr == "1":
        return WeightSpec(alpha, beta, HOne())
    mm = _EXP_POW_RE.match(hexpr)
    if mm:
        c, power = float(mm.group(1)), int(mm.group(2))
        if power == 1:
            return WeightSpec(alpha, beta, HExpLinear(c))
        if power % 2:
            raise ValueError(f"exponential power must be even or 1: {hexpr!r}")
        return WeightSpec(alpha, beta, HExpEvenPower(c, power // 2))
    mm = _EXP_LIN_RE.match(hexpr)
    if mm:
        return WeightSpec(alpha, beta, HExpLinear(float(mm.group(1))))
    factors = []
    for piece in hexpr.split("*"):
        mm = _FACTOR_RE.match(piece.strip())
        if mm is None:
            raise ValueError(f"cannot parse h factor: {piece.strip()!r}")
        sign = -1.0 if mm.group(1) == "+" else 1.0
        root = sign * float(mm.group(2))
        p = float(mm.group(3)) if mm.group(3) else 1.0
        factors.append((complex(root), p))
    return WeightSpec(alpha, beta, HLinearFactors(tuple(factors)))


def format_weight(spec: WeightSpec) -> str:
    """Inverse of parse_weight for the grammar variants."""
    h = spec.h
    head = f"jacobi({spec.alpha:g},{spec.beta:g})"
    if isinstance(h, HOne):
        return f"{head} * 1"
    if isinstance(h, HExpEvenPower):
        return f"{head} * exp(-{h.c:g}*x^{2 * h.m})"
    if isinstance(h, HExpLinear):
        return f"{head} * exp(-{h.t:g}*x)"
    if isinstance(h, HLinearFactors):
        parts = []
        for r, p in h.factors:
            rr = complex(r).real
            sign = "-" if rr >= 0 else "+"
            parts.append(f"(x {sign} {abs(rr):g})^({p:g})")
        return f"{head} * " + " * ".join(parts)
    raise ValueError("generic h has no text form")
