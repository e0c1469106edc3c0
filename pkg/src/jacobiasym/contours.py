"""Contour-integral machinery: D_infinity, the Cauchy transform m(z),
its Taylor data c_n / d_n, and the phase function psi(z).

Integrals are taken over Bernstein ellipses E_rho (foci +-1) with the
trapezoidal rule and successive point doubling; weights whose log h is
entire bypass quadrature entirely through residue calculus at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import binom

from . import branches, weights, _series
from .branches import Side
from .errors import ContourTooClose, InsufficientCoefficients, NoConvergence
from .weights import WeightSpec

__all__ = [
    "ContourParams",
    "AuxData",
    "trapezoid_ellipse",
    "default_rho",
    "compute_cn_dn",
    "compute_Dinf",
    "build_aux",
    "cauchy_m",
    "compute_psi",
    "compute_dpsi",
    "psi_series_endpoint",
]


@dataclass(frozen=True)
class ContourParams:
    """Trapezoidal-rule controls for the Bernstein-ellipse integrals."""

    rho: float | None = None      # None: pick the halfway heuristic
    M0: int = 16
    tol: float = 1e-13
    Mmax: int = 2 ** 14


@dataclass(frozen=True)
class AuxData:
    """Weight-dependent scalars feeding the asymptotic expansions."""

    Dinf: float
    cn: np.ndarray
    dn: np.ndarray
    rho_used: float
    M_used: int
    r_right: float   # distance from +1 to the nearest log h singularity
    r_left: float


def _ellipse_nodes(rho: float, M: int):
    t = 2.0 * np.pi * np.arange(M) / M
    e = np.exp(1j * t)
    zeta = 0.5 * (rho * e + e.conj() / rho)
    jac = 0.5 * (rho * e - e.conj() / rho)
    return zeta, jac


def trapezoid_ellipse(F, rho: float, M: int):
    """(1/2 pi i) * contour integral of F over E_rho with M equispaced points."""
    if M < 4:
        raise ValueError("need at least 4 trapezoid points")
    zeta, jac = _ellipse_nodes(rho, M)
    return np.sum(np.asarray(F(zeta)) * jac, axis=-1) / M


def _double_until(sample, params: ContourParams, what: str):
    """Run sample(M) with doubling M until two results agree to params.tol."""
    M = params.M0
    prev = np.atleast_1d(np.asarray(sample(M)))
    diff = math.inf
    while 2 * M <= params.Mmax:
        M *= 2
        cur = np.atleast_1d(np.asarray(sample(M)))
        diff = float(np.max(np.abs(cur - prev)))
        scale = max(1.0, float(np.max(np.abs(cur))))
        if diff <= params.tol * scale:
            return cur, M
        prev = cur
    raise NoConvergence(f"trapezoid doubling for {what} stalled at M = {M}",
                        m_used=M, residual=diff)


def default_rho(spec: WeightSpec) -> float:
    """Working ellipse: real-axis crossing halfway between the interval
    endpoint and the nearest log h singularity (the paper's heuristic)."""
    rmax = weights.rho_max(spec)
    if not math.isfinite(rmax):
        return 2.0
    x_sing = 0.5 * (rmax + 1.0 / rmax)    # semi-major axis through the singularity
    x_mid = 0.5 * (x_sing + 1.0)
    return x_mid + math.sqrt(x_mid * x_mid - 1.0)


def _sing_distance(spec: WeightSpec, endpoint: float) -> float:
    h = spec.h
    if weights.is_entire_logh(spec):
        return math.inf
    if isinstance(h, weights.HLinearFactors):
        return min(abs(complex(r) - endpoint) for r, _ in h.factors)
    rmax = weights.rho_max(spec)
    return 0.5 * (rmax + 1.0 / rmax) - 1.0


def _cn_dn_closed(spec: WeightSpec, N: int):
    """Exact c_n, d_n for the entire-log h presets."""
    h = spec.h
    cn = np.zeros(N, dtype=complex)
    dn = np.zeros(N, dtype=complex)
    if isinstance(h, weights.HExpLinear):
        if N > 0:
            cn[0] = -h.t
            dn[0] = -h.t
    elif isinstance(h, weights.HExpEvenPower):
        m = h.m
        for n in range(min(N, 2 * m)):
            s = 0.0
            for j in range((2 * m - n - 1) // 2 + 1):
                s += binom(j - 0.5, j) * binom(2 * m - 1 - 2 * j, 2 * m - n - 1 - 2 * j)
            cn[n] = -h.c * s
            dn[n] = (-1) ** (n + 1) * cn[n]
    return cn, dn


def _cn_dn_sampler(spec: WeightSpec, N: int, rho: float):
    def sample(M):
        zeta, jac = _ellipse_nodes(rho, M)
        base = (weights.eval_logh(spec, zeta, check_region=False)
                / branches.sqrt_zm1_zp1(zeta) * jac / M)
        pow_r = np.ones_like(zeta)
        pow_l = np.ones_like(zeta)
        out = np.empty(2 * N, dtype=complex)
        for n in range(N):
            pow_r = pow_r / (zeta - 1.0)
            pow_l = pow_l / (zeta + 1.0)
            out[n] = np.sum(base * pow_r)
            out[N + n] = np.sum(base * pow_l)
        return out
    return sample


def compute_cn_dn(spec: WeightSpec, N: int, params: ContourParams | None = None):
    """Taylor coefficients of the Cauchy transform m(z) at +1 (c_n) and -1 (d_n)."""
    params = params or ContourParams()
    if N <= 0:
        return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex)
    if weights.is_entire_logh(spec):
        return _cn_dn_closed(spec, N)
    rho = params.rho or default_rho(spec)
    weights.check_positive_real_part(spec, rho)
    both, _ = _double_until(_cn_dn_sampler(spec, N, rho), params, "c_n/d_n")
    return both[:N], both[N:]


def compute_Dinf(spec: WeightSpec, params: ContourParams | None = None) -> float:
    """Limit of the Szego function: 2^(-(a+b)/2) exp((1/4 pi i) contour integral)."""
    params = params or ContourParams()
    h = spec.h
    if isinstance(h, (weights.HOne, weights.HExpLinear)):
        integral = 0.0
    elif isinstance(h, weights.HExpEvenPower):
        integral = -h.c * binom(h.m - 0.5, h.m)
    else:
        rho = params.rho or default_rho(spec)
        weights.check_positive_real_part(spec, rho)

        def sample(M):
            return trapezoid_ellipse(
                lambda zeta: weights.eval_logh(spec, zeta, check_region=False)
                / branches.sqrt_zm1_zp1(zeta),
                rho, M)

        val, _ = _double_until(sample, params, "D_inf")
        integral = complex(val[0])
    dinf = 2.0 ** (-(spec.alpha + spec.beta) / 2.0) * np.exp(0.5 * integral)
    return float(np.real(dinf))


def build_aux(spec: WeightSpec, N: int, params: ContourParams | None = None) -> AuxData:
    """Compute and bundle all contour data for a weight."""
    params = params or ContourParams()
    rho = params.rho or default_rho(spec)
    M_used = params.M0
    if weights.is_entire_logh(spec):
        cn, dn = _cn_dn_closed(spec, N)
    else:
        weights.check_positive_real_part(spec, rho)
        both, M_used = _double_until(_cn_dn_sampler(spec, N, rho), params, "c_n/d_n")
        cn, dn = both[:N], both[N:]
    return AuxData(
        Dinf=compute_Dinf(spec, params),
        cn=cn, dn=dn, rho_used=rho, M_used=M_used,
        r_right=_sing_distance(spec, 1.0),
        r_left=_sing_distance(spec, -1.0),
    )


def _rho_for_point(spec: WeightSpec, z, base_rho: float):
    """Ellipse that encircles every requested point with a safety margin."""
    rho_z = float(np.max(branches.bernstein_rho(z)))
    need = rho_z * 1.05 + 0.02
    if need <= base_rho:
        return base_rho
    rmax = weights.rho_max(spec)
    if math.isfinite(rmax) and need >= rmax:
        raise ContourTooClose(
            f"point with Bernstein parameter {rho_z:.4g} leaves no room "
            f"inside rho_max = {rmax:.4g}")
    if math.isfinite(rmax):
        return min(max(need, math.sqrt(rho_z * rmax)), 0.5 * (need + rmax))
    return need


def _poly_eval(coeffs, v):
    if len(coeffs) == 0:
        return np.zeros_like(v)
    return np.polyval(np.asarray(coeffs)[::-1], v)


def _deriv_coeffs(cs):
    return cs[1:] * np.arange(1, len(cs))


def cauchy_m(spec: WeightSpec, aux: AuxData, z, deriv: int = 0,
             params: ContourParams | None = None, encircle: bool = True):
    """Cauchy transform m(z) of log h (or m'(z) for deriv=1).

    encircle=True is the branch whose contour surrounds both [-1,1] and z
    (the one psi uses); encircle=False keeps z outside, the two differing
    by the residue log h(z)/(z^2-1)^(1/2).
    """
    params = params or ContourParams()
    zc = np.asarray(z, dtype=complex)
    scalar = zc.ndim == 0
    zc = np.atleast_1d(zc)

    if weights.is_entire_logh(spec):
        cs = aux.cn if deriv == 0 else _deriv_coeffs(aux.cn)
        out = _poly_eval(cs, zc - 1.0)
        if not encircle:
            out = out - _m_residue(spec, zc, deriv)
        return out[0] if scalar else out

    out = np.empty_like(zc)
    if not encircle:
        rho = params.rho or default_rho(spec)

        def sample(M):
            zeta, jac = _ellipse_nodes(rho, M)
            base = (weights.eval_logh(spec, zeta, check_region=False)
                    / branches.sqrt_zm1_zp1(zeta) * jac / M)
            kern = 1.0 / (zeta[:, None] - zc[None, :])
            if deriv:
                kern = kern * kern
            return base @ kern

        vals, _ = _double_until(sample, params, "m_out(z)")
        out[:] = vals
        return out[0] if scalar else out

    done = np.zeros(zc.shape, dtype=bool)
    for endpoint, cs, r in ((1.0, aux.cn, aux.r_right), (-1.0, aux.dn, aux.r_left)):
        v = zc - endpoint
        mask = (np.abs(v) <= 0.25 * r) & ~done
        if np.any(mask):
            coef = cs if deriv == 0 else _deriv_coeffs(cs)
            out[mask] = _poly_eval(coef, v[mask])
            done |= mask
    todo = ~done
    if np.any(todo):
        zt = zc[todo]
        rho = _rho_for_point(spec, zt, params.rho or default_rho(spec))
        weights.check_positive_real_part(spec, rho)

        def sample(M):
            zeta, jac = _ellipse_nodes(rho, M)
            base = (weights.eval_logh(spec, zeta, check_region=False)
                    / branches.sqrt_zm1_zp1(zeta) * jac / M)
            kern = 1.0 / (zeta[:, None] - zt[None, :])
            if deriv:
                kern = kern * kern
            return base @ kern

        vals, _ = _double_until(sample, params, "m(z)")
        out[todo] = vals
    return out[0] if scalar else out


def _m_residue(spec, zc, deriv):
    """Residue term log h(z)/(z^2-1)^(1/2) (or its z-derivative)."""
    sq = branches.sqrt_zm1_zp1(zc)
    lh = weights.eval_logh(spec, zc, check_region=False)
    if deriv == 0:
        return lh / sq
    dlh = weights.eval_dlogh(spec, zc)
    return dlh / sq - lh * zc / sq ** 3


def compute_psi(spec: WeightSpec, z, aux: AuxData,
                params: ContourParams | None = None, side: Side = Side.PRINCIPAL):
    """Phase function psi(z) = (a+b)/2 arccos z - a pi/2 + (1-z^2)^(1/2) m(z)/2."""
    zc, mask = branches._normalize(z, side)
    acz = branches.arccos_stable(zc)
    sq = branches.sqrt_1mz2(zc)
    m = cauchy_m(spec, aux, zc, params=params)
    val = (0.5 * (spec.alpha + spec.beta) * acz - 0.5 * spec.alpha * np.pi
           + 0.5 * sq * m)
    return branches._apply_side(val, mask, side)


def compute_dpsi(spec: WeightSpec, z, aux: AuxData,
                 params: ContourParams | None = None):
    """d psi / dz, by analytic differentiation of the contour form."""
    zc = np.asarray(z, dtype=complex)
    sq = branches.sqrt_1mz2(zc)
    m = cauchy_m(spec, aux, zc, params=params)
    dm = cauchy_m(spec, aux, zc, deriv=1, params=params)
    return (-0.5 * (spec.alpha + spec.beta) / sq
            + 0.5 * (-zc / sq * m + sq * dm))


def psi_series_endpoint(spec: WeightSpec, aux: AuxData, endpoint: int, order: int):
    """Endpoint Taylor data of psi: (const, q) with

        psi(z) = const + arccos_pm(z) * sum_n q[n] v^n,   v = z -+ 1,

    where arccos_pm is arccos z at +1 and arccos(-z) at -1.
    """
    if endpoint not in (1, -1):
        raise ValueError("endpoint must be +1 or -1")
    cs = aux.cn if endpoint == 1 else aux.dn
    if order + 1 > len(cs):
        raise InsufficientCoefficients(
            f"need {order + 1} m-coefficients, have {len(cs)}")
    n_terms = order + 1
    sigma = 2.0 if endpoint == 1 else -2.0
    f = _series.logphi_f(n_terms, sigma)
    # sin(theta)/theta = sqrt(1 + v/sigma) / F(v)
    sinc = _series.conv(_series.binom_half(n_terms, sigma),
                        _series.series_inv(f, n_terms), n_terms)
    ab = spec.alpha + spec.beta
    q = 0.5 * _series.conv(sinc, cs[:n_terms].astype(complex), n_terms)
    q[0] += 0.5 * ab if endpoint == 1 else -0.5 * ab
    const = -0.5 * spec.alpha * np.pi if endpoint == 1 else 0.5 * spec.beta * np.pi
    return const, q
