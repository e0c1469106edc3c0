"""Complex branch-cut primitives shared by the whole library.

All multivalued functions here are the analytic continuations, off the
interval [-1, 1], of their positive real-axis restrictions.  The conformal
map phi(z) = z + sqrt(z-1)*sqrt(z+1) is built from two principal square
roots so that no spurious cut appears on the imaginary axis.

Boundary values on the cuts are selected with an explicit `Side` flag
instead of relying on the sign of a caller-supplied imaginary zero: the
input is normalized internally, and the below-limit is obtained from the
above-limit by Schwarz reflection (every function here is real-symmetric).
"""

from __future__ import annotations

import enum

import numpy as np

__all__ = [
    "Side",
    "phi",
    "theta",
    "acos_cut",
    "alg_powers",
    "one_minus",
    "sqrt_zm1_zp1",
    "sqrt_1mz2",
    "arccos_stable",
    "arccos_minus_stable",
    "bernstein_rho",
]


class Side(enum.Enum):
    """Which boundary limit to take for points sitting on a branch cut."""

    ABOVE = 1
    BELOW = -1
    PRINCIPAL = 0


def _normalize(z, side: Side):
    """Return z as complex ndarray with on-axis points moved to the +0j side."""
    zc = np.asarray(z, dtype=complex)
    if np.any(np.isnan(zc)):
        raise ValueError("NaN input to branch-cut primitive")
    real_mask = zc.imag == 0.0
    # force +0.0 imaginary part; BELOW is handled by conjugating the result
    zc = np.where(real_mask, zc.real + 0.0j, zc)
    return zc, real_mask


def _apply_side(values, real_mask, side: Side):
    if side is Side.BELOW:
        return np.where(real_mask, np.conj(values), values)
    return values


def one_minus(z):
    """1 - z with the imaginary sign matching continuation from Im z > 0.

    z -> 1-z maps the upper half-plane to the lower one; when z sits on the
    real axis the float subtraction produces +0.0, which would select the
    wrong side of every cut along (1, inf).  Conjugating exactly there
    restores the -0.0 that the above-limit requires.
    """
    zc = np.asarray(z, dtype=complex)
    w = 1.0 - zc
    return np.where(zc.imag == 0.0, np.conj(w), w)


def sqrt_zm1_zp1(z, side: Side = Side.PRINCIPAL):
    """(z^2-1)^(1/2) behaving like z at infinity; cut on [-1, 1] only."""
    zc, mask = _normalize(z, side)
    val = np.sqrt(zc - 1.0) * np.sqrt(zc + 1.0)
    return _apply_side(val, mask, side)


def sqrt_1mz2(z, side: Side = Side.PRINCIPAL):
    """(1-z^2)^(1/2), positive on (-1, 1); cut on (-inf,-1] u [1,inf)."""
    zc, mask = _normalize(z, side)
    val = np.sqrt(one_minus(zc)) * np.sqrt(1.0 + zc)
    return _apply_side(val, mask, side)


def phi(z, side: Side = Side.PRINCIPAL):
    """Conformal map z + (z^2-1)^(1/2) of C \\ [-1,1] onto |w| > 1."""
    zc, mask = _normalize(z, side)
    val = zc + np.sqrt(zc - 1.0) * np.sqrt(zc + 1.0)
    return _apply_side(val, mask, side)


def theta(z, side: Side = Side.PRINCIPAL):
    """Sign function: +1 where arg(z-1) > 0, -1 otherwise.

    Equals sgn(Im z) off the real axis and -sgn(z-1) on it; theta(1) = -1
    (the arg(0) = 0 convention falls in the "<= 0" branch).
    """
    zc = np.asarray(z, dtype=complex)
    if side is Side.ABOVE:
        return np.ones(zc.shape, dtype=int) if zc.shape else 1
    if side is Side.BELOW:
        return -np.ones(zc.shape, dtype=int) if zc.shape else -1
    out = np.where(zc.imag > 0, 1, np.where(zc.imag < 0, -1, np.where(zc.real < 1.0, 1, -1)))
    return out if zc.shape else int(out)


def acos_cut(z, side: Side = Side.PRINCIPAL):
    """Principal arccos with its cut on (-inf,-1] u [1,inf).

    On the cuts the ABOVE/BELOW flag selects the one-sided limit; the
    default (PRINCIPAL) coincides with ABOVE.
    """
    zc, mask = _normalize(z, side)
    val = np.arccos(zc)
    return _apply_side(val, mask, side)


def arccos_stable(z, side: Side = Side.PRINCIPAL):
    """arccos via 2*arcsin(sqrt((1-z)/2)); keeps full relative accuracy near z = 1."""
    zc, mask = _normalize(z, side)
    val = 2.0 * np.arcsin(np.sqrt(0.5 * one_minus(zc)))
    return _apply_side(val, mask, side)


def arccos_minus_stable(z, side: Side = Side.PRINCIPAL):
    """arccos(-z) = pi - arccos(z), computed stably near z = -1."""
    zc, mask = _normalize(z, side)
    val = 2.0 * np.arcsin(np.sqrt(0.5 * (1.0 + zc)))
    return _apply_side(val, mask, side)


def alg_powers(z, side: Side = Side.PRINCIPAL):
    """Half and quarter powers of z^2-1 and 1-z^2 on the paper's branches.

    Returns a dict with keys 'sq_plus' ((z^2-1)^(1/2), ~z at infinity),
    'sq_minus' ((1-z^2)^(1/2), positive on (-1,1)), 'q4_plus' and
    'q4_minus' (principal-product quarter powers; their squares reproduce
    the half powers pointwise).
    """
    zc, mask = _normalize(z, side)
    omz = one_minus(zc)
    sp = np.sqrt(zc - 1.0) * np.sqrt(zc + 1.0)
    sm = np.sqrt(omz) * np.sqrt(1.0 + zc)
    q4p = (zc - 1.0) ** 0.25 * (zc + 1.0) ** 0.25
    q4m = omz ** 0.25 * (1.0 + zc) ** 0.25
    return {
        "sq_plus": _apply_side(sp, mask, side),
        "sq_minus": _apply_side(sm, mask, side),
        "q4_plus": _apply_side(q4p, mask, side),
        "q4_minus": _apply_side(q4m, mask, side),
    }


def bernstein_rho(z):
    """Bernstein-ellipse parameter of z: the rho with z on E_rho (|phi(z)|)."""
    return np.abs(phi(z))
