"""Truncated power-series helpers used by the coefficient recursions.

Series are plain 1-D complex arrays of Taylor coefficients in the local
variable v = z -+ 1.  The endpoint is encoded by sigma = +2 (right disk)
or sigma = -2 (left disk), matching the (+-2v)^(1/2) bookkeeping of the
expansions: every half-power is tracked explicitly by the callers, so the
arrays themselves always hold integer-power coefficients.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import binom

__all__ = [
    "conv",
    "series_inv",
    "series_sqrt1p",
    "pochhammer",
    "logphi_f",
    "g_tables",
    "binom_half",
    "binom_mhalf",
    "t_ratio",
]


def conv(a, b, n_terms=None):
    """Truncated Cauchy product of two coefficient arrays."""
    if n_terms is None:
        n_terms = min(len(a), len(b))
    out = np.convolve(np.asarray(a), np.asarray(b))[:n_terms]
    if len(out) < n_terms:
        out = np.pad(out, (0, n_terms - len(out)))
    return out


def series_inv(a, n_terms):
    """Reciprocal series of a with a[0] != 0."""
    a = np.asarray(a, dtype=complex)
    out = np.zeros(n_terms, dtype=complex)
    out[0] = 1.0 / a[0]
    for n in range(1, n_terms):
        acc = 0.0
        for j in range(max(0, n - len(a) + 1), n):
            acc += out[j] * a[n - j]
        out[n] = -acc / a[0]
    return out


def series_sqrt1p(coef, n_terms):
    """Series of sqrt(1 + coef*v) via the binomial expansion."""
    j = np.arange(n_terms)
    return binom(0.5, j) * (coef ** j).astype(complex)


def pochhammer(x, n):
    """Rising factorial (x)_n."""
    out = 1.0
    for k in range(n):
        out *= x + k
    return out


def binom_half(n_terms, sigma):
    """Coefficients binom(1/2, j) * sigma^(-j): series of (1 + v/sigma)^(1/2)."""
    j = np.arange(n_terms)
    return binom(0.5, j) * (1.0 / sigma) ** j


def binom_mhalf(n_terms, sigma):
    """Coefficients binom(-1/2, j) * sigma^(-j): series of (1 + v/sigma)^(-1/2)."""
    j = np.arange(n_terms)
    return binom(-0.5, j) * (1.0 / sigma) ** j


def t_ratio(n_terms, sigma):
    """Coefficients of z/(z^2-1)^(1/2) = V^(-1) * sum t_n v^n (same both disks)."""
    n = np.arange(n_terms)
    return (2 * n + 1) * binom(n - 1.5, n) * (-1.0 / sigma) ** n


def logphi_f(n_terms, sigma):
    """f_n with log(+-phi) = (sigma*v)^(1/2) * sum f_n v^n.

    f_n = (1/2)_n / ((-sigma)^n n! (1+2n)); sigma = +2 right, -2 left.
    """
    out = np.empty(n_terms)
    for n in range(n_terms):
        out[n] = pochhammer(0.5, n) / ((-sigma) ** n * math.factorial(n) * (1 + 2 * n))
    return out


def g_tables(k_max, n_terms, f):
    """g[k][n] with (log(+-phi))^(-k) = (sigma*v)^(-k/2) * sum g_{k,n} v^n."""
    g1 = series_inv(f, n_terms)
    g = [None, g1]
    for k in range(2, k_max + 1):
        g.append(conv(g[k - 1], g1, n_terms))
    return g
