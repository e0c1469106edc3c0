"""Bessel functions J_nu, J_nu' of real order nu > -1.

Self-contained: ascending series for small argument, Hankel asymptotics
for large argument, and series-seeded downward recurrence in between
(the recurrence is stable downward because J is the minimal solution in
increasing order).  Complex arguments are accepted everywhere; accuracy
for complex x is that of the ascending/Hankel formulas and degrades once
|Im x| grows beyond a few tens.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

__all__ = ["besselj", "besselj_prime", "besselj_second", "js_scaled", "bessel_zeros"]

_SERIES_CUT = 8.0


def _hankel_cut(nu: float) -> float:
    return max(18.0, 0.35 * nu * nu + 12.0)


def js_scaled(nu: float, s):
    """JS_nu(s) = sum_j (-s/4)^j / (j! Gamma(nu+j+1)), so J_nu(x) = (x/2)^nu JS_nu(x^2).

    Entire in s; intended for |s| up to a few hundred (the endpoint series
    zone), where the alternating sum is still well conditioned.
    """
    s = np.asarray(s, dtype=complex)
    term = np.full(s.shape, 1.0 / math.gamma(nu + 1.0), dtype=complex)
    acc = term.copy()
    for j in range(200):
        term = term * (-s / 4.0) / ((j + 1.0) * (nu + j + 1.0))
        acc += term
        if np.all(np.abs(term) <= 1e-17 * (np.abs(acc) + 1e-300)):
            break
    return acc


def _series_j(nu: float, x):
    xc = np.asarray(x, dtype=complex)
    out = (xc / 2.0) ** nu * js_scaled(nu, xc * xc)
    return out


def _series_j_log(nu: float, x):
    """(mantissa, log_scale) with J_nu(x) = mantissa * exp(log_scale).

    Overflow-free for any order: the gamma factor lives in log_scale and
    the ratio-driven series needs no factorials.
    """
    xc = np.asarray(x, dtype=complex)
    s = xc * xc
    term = np.ones_like(xc)
    acc = term.copy()
    for j in range(300):
        term = term * (-s / 4.0) / ((j + 1.0) * (nu + j + 1.0))
        acc += term
        if np.all(np.abs(term) <= 1e-17 * (np.abs(acc) + 1e-300)):
            break
    log_scale = nu * np.log(xc / 2.0) - math.lgamma(nu + 1.0)
    return acc, log_scale


def _hankel_j(nu: float, x):
    """Large-argument asymptotic expansion with optimal truncation."""
    xc = np.asarray(x, dtype=complex)
    mu = 4.0 * nu * nu
    # cos/sin of omega = x - (nu/2 + 1/4) pi via the addition formula: the
    # direct subtraction loses ~|x| eps of phase for large x
    c = (0.5 * nu + 0.25) * math.pi
    cos_o = np.cos(xc) * math.cos(c) + np.sin(xc) * math.sin(c)
    sin_o = np.sin(xc) * math.cos(c) - np.cos(xc) * math.sin(c)
    term = np.ones_like(xc)
    p = np.ones_like(xc)
    q = np.zeros_like(xc)
    frozen = np.zeros(xc.shape, dtype=bool)
    prev_mag = np.full(xc.shape, np.inf)
    for k in range(1, 60):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * xc)
        mag = np.abs(term)
        frozen |= mag > prev_mag
        prev_mag = mag
        contrib = np.where(frozen, 0.0, term)
        sgn = (-1) ** (k // 2)
        if k % 2:
            q = q + sgn * contrib
        else:
            p = p + sgn * contrib
        if np.all(frozen | (mag <= 1e-17)):
            break
    return np.sqrt(2.0 / (np.pi * xc)) * (cos_o * p - sin_o * q)


def _recurrence_j(nu: float, x):
    """Series seed at a safely high order, then downward recurrence to nu.

    The seed order grows like x^2/12 so the alternating seed series stays
    well conditioned; seeds are carried in (mantissa, log-scale) form and
    the recurrence rescales on the fly, since J at the seed order can be
    far below the underflow threshold.
    """
    xc = np.asarray(x, dtype=complex)
    xmax = float(np.max(np.abs(xc)))
    m = int(math.ceil(max(0.0, xmax * xmax / 12.0 + 12.0 - nu)))
    m1, e1 = _series_j_log(nu + m + 1, xc)
    m0, e0 = _series_j_log(nu + m, xc)
    scale = np.maximum(e0.real, e1.real)
    jp1 = m1 * np.exp(e1 - scale)
    jn = m0 * np.exp(e0 - scale)
    for k in range(m, 0, -1):
        jp1, jn = jn, (2.0 * (nu + k) / xc) * jn - jp1
        big = np.abs(jn) > 1e250
        if np.any(big):
            jp1 = np.where(big, jp1 * 1e-250, jp1)
            jn = np.where(big, jn * 1e-250, jn)
            scale = scale + np.where(big, math.log(1e250), 0.0)
    return jn * np.exp(scale)


def besselj(nu: float, x):
    """J_nu(x) for nu > -1; x real >= 0 or complex."""
    if nu <= -1.0:
        raise DomainError("order must exceed -1")
    xc = np.asarray(x)
    is_complex = np.iscomplexobj(xc)
    if not is_complex and np.any(xc < 0):
        raise DomainError("negative real argument")
    scalar = xc.ndim == 0
    xc = np.atleast_1d(np.asarray(xc, dtype=complex))
    out = np.empty_like(xc)

    r = np.abs(xc)
    zero = r == 0.0
    if np.any(zero):
        out[zero] = 1.0 if nu == 0.0 else (0.0 if nu > 0 else np.inf)
    small = (r <= _SERIES_CUT) & ~zero
    if np.any(small):
        out[small] = _series_j(nu, xc[small])
    big = r >= _hankel_cut(nu)
    if np.any(big):
        out[big] = _hankel_j(nu, xc[big])
    mid = ~zero & ~small & ~big
    if np.any(mid):
        out[mid] = _recurrence_j(nu, xc[mid])

    if not is_complex:
        out = out.real
    return out[0] if scalar else out


def besselj_prime(nu: float, x):
    """J_nu'(x) = (nu/x) J_nu(x) - J_{nu+1}(x); x != 0."""
    scalar = np.asarray(x).ndim == 0
    xc = np.atleast_1d(np.asarray(x, dtype=complex))
    if np.any(xc == 0):
        raise DomainError("derivative requested at x = 0")
    out = ((nu / xc) * np.atleast_1d(np.asarray(besselj(nu, x), dtype=complex))
           - np.atleast_1d(np.asarray(besselj(nu + 1, x), dtype=complex)))
    if not np.iscomplexobj(np.asarray(x)):
        out = out.real
    return out[0] if scalar else out


def besselj_second(nu: float, x, j=None, jp=None):
    """J_nu''(x) from the Bessel differential equation."""
    scalar = np.asarray(x).ndim == 0
    xc = np.atleast_1d(np.asarray(x, dtype=complex))
    if j is None:
        j = besselj(nu, x)
    if jp is None:
        jp = besselj_prime(nu, x)
    jc = np.atleast_1d(np.asarray(j, dtype=complex))
    jpc = np.atleast_1d(np.asarray(jp, dtype=complex))
    out = -jpc / xc - (1.0 - (nu / xc) ** 2) * jc
    if not np.iscomplexobj(np.asarray(x)):
        out = out.real
    return out[0] if scalar else out


def bessel_zeros(nu: float, count: int):
    """First `count` positive zeros of J_nu, by McMahon guess + Newton."""
    zeros = np.empty(count)
    mu = 4.0 * nu * nu
    for k in range(1, count + 1):
        b = (k + 0.5 * nu - 0.25) * math.pi
        x = b - (mu - 1) / (8 * b) - 4 * (mu - 1) * (7 * mu - 31) / (3 * (8 * b) ** 3)
        x = max(x, 0.1)
        for _ in range(30):
            f = float(besselj(nu, x))
            fp = float(besselj_prime(nu, x))
            step = f / fp
            x -= step
            if abs(step) < 1e-15 * (1 + abs(x)):
                break
        zeros[k - 1] = x
    return zeros
