"""User-facing evaluators: pi_n(z) in all regions, derivatives, gamma_n,
recurrence coefficients, with automatic region selection.

All regional formulas are assembled in log-magnitude form: the factors
2^(+-n), the outer exponential and the weight powers are combined inside
a single exponent before exponentiation, so monic values stay finite as
long as the result itself is representable.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import bessel, branches, coeffs, contours, weights
from .contours import ContourParams
from .errors import (InsideDisk, InvalidDegree, NegativeSquare, OutsideDisk,
                     RegionForcedOutsideValidity)
from .weights import WeightSpec

__all__ = ["RegionTag", "EvalResult", "Engine"]

_LN2 = math.log(2.0)


class RegionTag(enum.Enum):
    LENS = "lens"
    OUTER = "outer"
    RIGHT_DISK = "rightdisk"
    LEFT_DISK = "leftdisk"
    RIGHT_SERIES = "rightseries"
    LEFT_SERIES = "leftseries"


@dataclass
class EvalResult:
    """Value plus evaluation metadata; fields are arrays for array input."""

    value: complex | np.ndarray
    region: RegionTag | np.ndarray
    terms_used: int
    next_term_estimate: float | np.ndarray


def _sinc(w):
    """sin(w)/w, stable at w = 0."""
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < 1e-4
    ws = np.where(small, 1.0, w)
    out = np.sin(ws) / ws
    w2 = w * w
    return np.where(small, 1.0 - w2 / 6.0 + w2 * w2 / 120.0, out)


class Engine:
    """Evaluator bound to one weight and one expansion depth T."""

    def __init__(self, weight: WeightSpec, terms: int = 4,
                 disk_radius: float = 0.2, lens_height: float = 0.6,
                 series_radius: float = 0.05,
                 contour: ContourParams | None = None,
                 outer_form: str = "auto"):
        if not 0.0 < disk_radius < 1.0:
            raise ValueError("disk_radius must lie in (0, 1)")
        if outer_form not in ("auto", "psi", "szego"):
            raise ValueError("outer_form must be auto, psi or szego")
        self.weight = weight
        self.T = int(terms)
        self.disk_radius = disk_radius
        self.lens_height = lens_height
        self.series_radius = series_radius
        self.params = contour or ContourParams()
        self.outer_form = outer_form
        n_max = self.T + 2
        m_hi = n_max + (self.T + 1) // 2 + 1
        n_coef = m_hi + (self.T + 1) // 2 + 2
        self.aux = contours.build_aux(weight, n_coef, self.params)
        self.table = coeffs.build_coeff_table(
            weight.alpha, weight.beta, self.aux.Dinf, self.aux.cn, self.aux.dn,
            T=self.T, n_max=n_max)

    # -- small helpers ------------------------------------------------------

    def _psi(self, z):
        return contours.compute_psi(self.weight, z, self.aux, self.params)

    def _dpsi(self, z):
        return contours.compute_dpsi(self.weight, z, self.aux, self.params)

    def _m(self, z, deriv=0, encircle=True):
        return contours.cauchy_m(self.weight, self.aux, z, deriv=deriv,
                                 params=self.params, encircle=encircle)

    def _logh(self, z):
        return weights.eval_logh(self.weight, z, check_region=False)

    def _dlogh(self, z):
        return weights.eval_dlogh(self.weight, z)

    # -- region selection ---------------------------------------------------

    def select_region(self, z, n: int | None = None):
        """Geometric region choice; the n-aware endpoint-series refinement
        applies only when n is given."""
        zc = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(zc.shape, dtype=object)
        dr = np.abs(zc - 1.0)
        dl = np.abs(zc + 1.0)
        interval_dist = np.where(np.abs(zc.real) <= 1.0, np.abs(zc.imag),
                                 np.minimum(dr, dl))
        out[:] = RegionTag.OUTER
        out[interval_dist < self.lens_height] = RegionTag.LENS
        out[dl < self.disk_radius] = RegionTag.LEFT_DISK
        out[dr < self.disk_radius] = RegionTag.RIGHT_DISK
        if n is not None:
            th_r = np.abs(branches.arccos_stable(zc))
            th_l = np.abs(branches.arccos_stable(-zc))
            ser_r = (out == RegionTag.RIGHT_DISK) & (n * th_r <= 7.0) & (dr <= 0.01)
            ser_l = (out == RegionTag.LEFT_DISK) & (n * th_l <= 7.0) & (dl <= 0.01)
            out[ser_r] = RegionTag.RIGHT_SERIES
            out[ser_l] = RegionTag.LEFT_SERIES
        return out[0] if np.asarray(z).ndim == 0 else out

    # -- R matrices ---------------------------------------------------------

    def R_outer(self, z, k_max: int | None = None):
        """R^O_1..R^O_k at z (rational in z); z must be outside both disks."""
        zc = np.asarray(z, dtype=complex)
        if np.any(np.abs(zc - 1.0) < self.disk_radius) or \
           np.any(np.abs(zc + 1.0) < self.disk_radius):
            raise InsideDisk("R_outer requested inside an endpoint disk")
        return coeffs.ro_outer(self.table, zc, k_max or self.T)

    def _ro_and_deriv(self, z, k_max, want_deriv):
        zc = np.asarray(z, dtype=complex)
        rs = coeffs.ro_outer(self.table, zc, k_max)
        if not want_deriv:
            return rs, None
        drs = []
        for k in range(1, k_max + 1):
            acc = np.zeros(zc.shape + (2, 2), dtype=complex)
            for m in range(1, (k + 1) // 2 + 1):
                acc += (-m * self.table.right.u(k, m)
                        / (zc - 1.0)[..., None, None] ** (m + 1)
                        - m * self.table.left.u(k, m)
                        / (zc + 1.0)[..., None, None] ** (m + 1))
            drs.append(acc)
        return rs, drs

    def R_disk(self, z, endpoint: int, k_max: int | None = None):
        """R_1..R_k inside the endpoint disk (Taylor series or pole-subtracted)."""
        zc = np.asarray(z, dtype=complex)
        if np.any(np.abs(zc - endpoint) >= self.disk_radius):
            raise OutsideDisk("R_disk requested outside the disk")
        rs, _ = self._r_disk(zc, endpoint, k_max or self.T, False)
        return rs

    def _r_disk(self, z, endpoint, k_max, want_deriv):
        """Disk R_k by Q series near the endpoint, pole subtraction beyond."""
        zc = np.atleast_1d(np.asarray(z, dtype=complex))
        v = zc - endpoint
        tab = self.table.endpoint(endpoint)
        rs = [np.zeros(zc.shape + (2, 2), dtype=complex) for _ in range(k_max)]
        drs = [np.zeros(zc.shape + (2, 2), dtype=complex) for _ in range(k_max)] \
            if want_deriv else None
        near = np.abs(v) <= self.series_radius
        if np.any(near):
            vn = v[near]
            for k in range(1, k_max + 1):
                acc = np.zeros(vn.shape + (2, 2), dtype=complex)
                dacc = np.zeros_like(acc)
                for n in range(self.table.n_max, -1, -1):
                    acc = acc * vn[..., None, None] + tab.Q[k][n]
                    if want_deriv and n >= 1:
                        dacc = dacc * vn[..., None, None] + n * tab.Q[k][n]
                rs[k - 1][near] = acc
                if want_deriv:
                    drs[k - 1][near] = dacc
        far = ~near
        if np.any(far):
            zf = zc[far]
            m_val = self._m(zf)
            dm_val = self._m(zf, deriv=1) if want_deriv else None
            ro, dro = self._ro_and_deriv(zf, k_max, want_deriv)
            al, be, dinf = self.weight.alpha, self.weight.beta, self.aux.Dinf
            s_vals = [None] + [coeffs.s_direct(m, zf, endpoint, al, be, dinf, m_val)
                               for m in range(1, k_max + 1)]
            if want_deriv:
                ds_vals = [None] + [coeffs.s_direct_deriv(m, zf, endpoint, al, be,
                                                          dinf, m_val, dm_val)
                                    for m in range(1, k_max + 1)]
            eye = np.broadcast_to(np.eye(2, dtype=complex), zf.shape + (2, 2))
            for k in range(1, k_max + 1):
                acc = ro[k - 1].copy()
                dacc = dro[k - 1].copy() if want_deriv else None
                for m in range(1, k + 1):
                    prev = ro[k - m - 1] if k - m >= 1 else eye
                    acc = acc - prev @ s_vals[m]
                    if want_deriv:
                        dprev = dro[k - m - 1] if k - m >= 1 else 0.0 * eye
                        dacc = dacc - dprev @ s_vals[m] - prev @ ds_vals[m]
                rs[k - 1][far] = acc
                if want_deriv:
                    drs[k - 1][far] = dacc
        return rs, drs

    def _first_row(self, n, r_list, dr_list=None):
        """(r11, r12) of I + sum R_k / n^k, with the last-term size."""
        shape = r_list[0].shape[:-2] if r_list else ()
        r11 = np.ones(shape, dtype=complex)
        r12 = np.zeros(shape, dtype=complex)
        dr11 = np.zeros(shape, dtype=complex)
        dr12 = np.zeros(shape, dtype=complex)
        last = np.zeros(shape)
        for k, rk in enumerate(r_list, start=1):
            scale = float(n) ** (-k)
            r11 = r11 + rk[..., 0, 0] * scale
            r12 = r12 + rk[..., 0, 1] * scale
            if dr_list is not None:
                dr11 = dr11 + dr_list[k - 1][..., 0, 0] * scale
                dr12 = dr12 + dr_list[k - 1][..., 0, 1] * scale
            if k == len(r_list):
                last = (np.abs(rk[..., 0, 0]) + np.abs(rk[..., 0, 1])) * scale
        return r11, r12, dr11, dr12, last

    # -- scalar sequences ---------------------------------------------------

    def _gamma_series(self, n):
        """S with gamma_n^2 = 4^n / (pi Dinf^2) (1 + S)."""
        s = 0.0 + 0.0j
        for k in range(1, self.T + 1):
            a_k = self.table.right.u(k, 1) + self.table.left.u(k, 1)
            s += 2j * self.aux.Dinf ** 2 * a_k[1, 0] / (n + 1.0) ** k
        return s

    def log_gamma_n(self, n: int) -> float:
        """log of the orthonormal leading coefficient gamma_n."""
        s = self._gamma_series(n)
        val = 1.0 + s.real
        if val <= 0.0:
            raise NegativeSquare(f"gamma_{n}^2 series truncation non-positive")
        return (n * _LN2 - 0.5 * math.log(math.pi * self.aux.Dinf ** 2)
                + 0.5 * math.log1p(s.real))

    def gamma_n(self, n: int) -> float:
        """Leading coefficient of the orthonormal polynomial p_n."""
        return math.exp(self.log_gamma_n(n))

    def recurrence_coeffs(self, n: int):
        """(alpha_n, beta_n) of the monic three-term recurrence, asymptotically."""
        if n < 1:
            raise InvalidDegree("n must be >= 1")
        a_sum = 0.0 + 0.0j
        b21 = 1.0 / (2j * self.aux.Dinf ** 2)
        b12 = -self.aux.Dinf ** 2 / 2j
        for k in range(1, self.T + 1):
            a_k = self.table.right.u(k, 1) + self.table.left.u(k, 1)
            a_sum += a_k[0, 0] / (n + 1.0) ** k + a_k[1, 1] / float(n) ** k
            b21 += a_k[1, 0] / float(n) ** k
            b12 += a_k[0, 1] / float(n) ** k
        return float((-a_sum).real), float((b21 * b12).real)

    # -- public evaluation API ----------------------------------------------

    def eval_monic(self, n, z, region: RegionTag | None = None) -> EvalResult:
        return self._dispatch(n, z, region, orthonormal=False, derivative=False)

    def eval_orthonormal(self, n, z, region: RegionTag | None = None) -> EvalResult:
        return self._dispatch(n, z, region, orthonormal=True, derivative=False)

    def eval_derivative(self, n, z, region: RegionTag | None = None,
                        orthonormal: bool = False) -> EvalResult:
        return self._dispatch(n, z, region, orthonormal=orthonormal,
                              derivative=True)

    # -- dispatch ------------------------------------------------------------

    def _dispatch(self, n, z, region, orthonormal, derivative) -> EvalResult:
        if n < 1:
            raise InvalidDegree("degree must be >= 1")
        scalar = np.asarray(z).ndim == 0
        zc, real_mask = branches._normalize(np.atleast_1d(z), branches.Side.ABOVE)
        log_extra = self.log_gamma_n(n) if orthonormal else 0.0
        if region is None:
            tags = np.atleast_1d(self.select_region(zc, n))
        else:
            tags = np.empty(zc.shape, dtype=object)
            tags[:] = region
            self._warn_forced(region, zc)
        vals = np.empty(zc.shape, dtype=complex)
        ests = np.empty(zc.shape, dtype=float)
        for tag in (RegionTag.LENS, RegionTag.OUTER, RegionTag.RIGHT_DISK,
                    RegionTag.LEFT_DISK, RegionTag.RIGHT_SERIES,
                    RegionTag.LEFT_SERIES):
            mask = tags == tag
            if not np.any(mask):
                continue
            zs = zc[mask]
            if tag is RegionTag.LENS:
                v, dv, est = self._lens(n, zs, log_extra, derivative)
            elif tag is RegionTag.OUTER:
                v, dv, est = self._outer(n, zs, log_extra, derivative)
            else:
                endpoint = 1 if tag in (RegionTag.RIGHT_DISK,
                                        RegionTag.RIGHT_SERIES) else -1
                use_series = tag in (RegionTag.RIGHT_SERIES, RegionTag.LEFT_SERIES)
                v, dv, est = self._disk(n, zs, endpoint, log_extra, derivative,
                                        use_series)
            vals[mask] = dv if derivative else v
            ests[mask] = est
        out = EvalResult(value=vals, region=tags, terms_used=self.T,
                         next_term_estimate=ests)
        if scalar:
            out = EvalResult(value=vals[0], region=tags[0], terms_used=self.T,
                             next_term_estimate=ests[0])
        return out

    def _warn_forced(self, region, zc):
        dr = np.abs(zc - 1.0)
        dl = np.abs(zc + 1.0)
        dist = np.where(np.abs(zc.real) <= 1.0, np.abs(zc.imag),
                        np.minimum(dr, dl))
        bad = False
        if region is RegionTag.LENS and np.any(dist > 1.0):
            bad = True
        if region in (RegionTag.RIGHT_DISK, RegionTag.RIGHT_SERIES) and np.any(dr > 0.5):
            bad = True
        if region in (RegionTag.LEFT_DISK, RegionTag.LEFT_SERIES) and np.any(dl > 0.5):
            bad = True
        if bad:
            warnings.warn("region forced far outside its validity zone",
                          RegionForcedOutsideValidity)

    # -- regional assemblers --------------------------------------------------

    def _log_w_quarter(self, z):
        """-(a/2+1/4) Log(1-z) - (b/2+1/4) Log(1+z) - logh/2 and its derivative."""
        al, be = self.weight.alpha, self.weight.beta
        l1 = np.log(branches.one_minus(z))
        l2 = np.log(1.0 + z)
        L = -(0.5 * al + 0.25) * l1 - (0.5 * be + 0.25) * l2 - 0.5 * self._logh(z)
        dL = ((0.5 * al + 0.25) / (1.0 - z) - (0.5 * be + 0.25) / (1.0 + z)
              - 0.5 * self._dlogh(z))
        return L, dL

    def _lens(self, n, z, log_extra, want_deriv):
        dinf = self.aux.Dinf
        theta_c = branches.arccos_stable(z)
        psi = self._psi(z)
        lam1 = (n + 0.5) * theta_c + psi - 0.25 * np.pi
        lam2 = lam1 - theta_c
        Lw, dLw = self._log_w_quarter(z)
        L = (0.5 - n) * _LN2 + Lw + log_extra
        r_list, dr_list = self._ro_and_deriv(z, self.T, want_deriv)
        r11, r12, dr11, dr12, last = self._first_row(n, r_list, dr_list)
        s = np.where(lam1.imag <= 0.0, 1.0, -1.0)
        G = 1j * s * lam1
        e1p = np.exp(1j * lam1 - G)
        e1m = np.exp(-1j * lam1 - G)
        e2p = np.exp(1j * lam2 - G)
        e2m = np.exp(-1j * lam2 - G)
        B = 0.5 * (r11 * dinf * (e1p + e1m) - 1j * r12 / dinf * (e2p + e2m))
        val = np.exp(L + G) * B
        est = last / (n * np.maximum(np.abs(r11), 1e-300))
        if not want_deriv:
            return val, None, est
        sq = branches.sqrt_1mz2(z)
        dth = -1.0 / sq
        dpsi = self._dpsi(z)
        dG = 1j * s * ((n + 0.5) * dth + dpsi)
        dlam1 = (n + 0.5) * dth + dpsi
        dlam2 = dlam1 - dth
        dB = 0.5 * (dr11 * dinf * (e1p + e1m)
                    + r11 * dinf * ((1j * dlam1 - dG) * e1p + (-1j * dlam1 - dG) * e1m)
                    - 1j * dr12 / dinf * (e2p + e2m)
                    - 1j * r12 / dinf * ((1j * dlam2 - dG) * e2p
                                         + (-1j * dlam2 - dG) * e2m))
        dval = np.exp(L + G) * ((dLw + dG) * B + dB)
        return val, dval, est

    def _theta_eff(self, z):
        return np.where(z.imag < 0.0, -1.0, 1.0)

    def _outer(self, n, z, log_extra, want_deriv):
        al, be = self.weight.alpha, self.weight.beta
        dinf = self.aux.Dinf
        theta_c = branches.arccos_stable(z)
        rmax = weights.rho_max(self.weight)
        use_szego = self.outer_form == "szego"
        if self.outer_form == "auto" and math.isfinite(rmax):
            use_szego = bool(np.any(branches.bernstein_rho(z) >= 0.95 * rmax))
        if use_szego:
            m = self._m(z, encircle=False)
            sq = branches.sqrt_1mz2(z)
            psi = (0.5 * (al + be) * theta_c - 0.5 * al * np.pi + 0.5 * sq * m)
            L = (-(0.5 + n) * _LN2 - 0.5 * al * np.log(z - 1.0)
                 - 0.5 * be * np.log(z + 1.0)
                 - 0.25 * (np.log(branches.one_minus(z)) + np.log(1.0 + z))
                 + log_extra)
        else:
            psi = self._psi(z)
            Lw, dLw = self._log_w_quarter(z)
            L = -(0.5 + n) * _LN2 + Lw + log_extra
        lam1 = (n + 0.5) * theta_c + psi - 0.25 * np.pi
        th = self._theta_eff(z)
        ph = branches.phi(z)
        r_list, dr_list = self._ro_and_deriv(z, self.T, want_deriv)
        r11, r12, dr11, dr12, last = self._first_row(n, r_list, dr_list)
        C = r11 * dinf - 1j * r12 / (dinf * ph)
        val = np.exp(L + 1j * th * lam1) * C
        est = last / (n * np.maximum(np.abs(r11), 1e-300))
        if not want_deriv:
            return val, None, est
        sqm = branches.sqrt_1mz2(z)
        sqp = branches.sqrt_zm1_zp1(z)
        dth_c = -1.0 / sqm
        if use_szego:
            dm = self._m(z, deriv=1, encircle=False)
            m0 = self._m(z, encircle=False)
            dpsi = (-0.5 * (al + be) / sqm + 0.5 * (-z / sqm * m0 + sqm * dm))
            dL = (-0.5 * al / (z - 1.0) - 0.5 * be / (z + 1.0)
                  + 0.25 / (1.0 - z) - 0.25 / (1.0 + z))
        else:
            dpsi = self._dpsi(z)
            dL = dLw
        dlam1 = (n + 0.5) * dth_c + dpsi
        dC = dr11 * dinf - 1j * dr12 / (dinf * ph) + 1j * r12 / (dinf * ph * sqp)
        dval = np.exp(L + 1j * th * lam1) * ((dL + 1j * th * dlam1) * C + dC)
        return val, dval, est

    def _disk(self, n, z, endpoint, log_extra, want_deriv, use_series):
        al, be = self.weight.alpha, self.weight.beta
        dinf = self.aux.Dinf
        nu = al if endpoint == 1 else be
        other = be if endpoint == 1 else al
        theta = (branches.arccos_stable(z) if endpoint == 1
                 else branches.arccos_minus_stable(z))
        v = z - endpoint
        m_val = self._m(z)
        sig = 1.0 if endpoint == 1 else -1.0
        # zeta1/x1 = sig*(a+b+1)/2 * theta + sin(theta) m/2; zeta2/x2 offset by theta
        base_ratio = sig * 0.5 * (al + be + 1.0) + 0.5 * _sinc(theta) * m_val
        c1 = theta * base_ratio
        c2 = c1 - sig * theta
        ratio2 = base_ratio - sig
        # prefactor exponent; theta^2/(-sig*v) -> 2 at the endpoint
        v_safe = np.where(v == 0, 1.0, -sig * v)
        ratio = np.where(v == 0, 2.0 + 0.0j, theta * theta / v_safe)
        L = (0.5 * np.log(np.pi * n) - (n + nu) * _LN2 + nu * math.log(n)
             + (0.5 * nu + 0.25) * np.log(ratio)
             - (0.5 * other + 0.25) * np.log(2.0 + sig * v)
             - 0.5 * self._logh(z) + log_extra)
        sign = 1.0 if (endpoint == 1 or n % 2 == 0) else -1.0
        w_arg = (n * theta) ** 2
        if use_series:
            js0 = bessel.js_scaled(nu, w_arg)
            js1 = bessel.js_scaled(nu + 1, w_arg)
            js2 = bessel.js_scaled(nu + 2, w_arg) if want_deriv else None
        else:
            x = n * theta
            scale = (0.5 * x) ** (-nu)
            js0 = np.asarray(bessel.besselj(nu, x), dtype=complex) * scale
            js1 = np.asarray(bessel.besselj(nu + 1, x), dtype=complex) * scale * (2.0 / x)
            js2 = (np.asarray(bessel.besselj(nu + 2, x), dtype=complex)
                   * scale * (2.0 / x) ** 2) if want_deriv else None
        cos1, cos2 = np.cos(c1), np.cos(c2)
        sinc1, sinc2 = _sinc(c1), _sinc(c2)
        s1_over = base_ratio * sinc1          # sin(c1)/theta
        s2_over = ratio2 * sinc2
        t_sin1 = theta * theta * base_ratio * sinc1   # theta*sin(c1)
        t_sin2 = theta * theta * ratio2 * sinc2
        if endpoint == 1:
            phi1 = (cos1 + (nu / n) * s1_over) * js0 - 0.5 * n * t_sin1 * js1
            phi2 = (cos2 + (nu / n) * s2_over) * js0 - 0.5 * n * t_sin2 * js1
        else:
            phi1 = (cos1 - (nu / n) * s1_over) * js0 + 0.5 * n * t_sin1 * js1
            phi2 = -((cos2 - (nu / n) * s2_over) * js0 + 0.5 * n * t_sin2 * js1)
        r_list, dr_list = self._r_disk(z, endpoint, self.T, want_deriv)
        r11, r12, dr11, dr12, last = self._first_row(n, r_list, dr_list)
        K = r11 * dinf * phi1 - 1j * r12 / dinf * phi2
        val = sign * np.exp(L) * K
        est = last / (n * np.maximum(np.abs(r11), 1e-300))
        if not want_deriv:
            return val, None, est
        # derivatives.  dtheta = -sig/sin(theta) blows up at the endpoint, so
        # every occurrence is kept in the finite combinations theta*dtheta
        # (= -sig/sinc(theta)) or sin(theta)*dtheta (= -sig).
        dm = self._m(z, deriv=1)
        sinc_t = _sinc(theta)
        sin_t = theta * sinc_t
        thdth = -sig / sinc_t                       # theta * dtheta
        # dc1 = dtheta * A + B
        A1 = sig * 0.5 * (al + be + 1.0) + 0.5 * np.cos(theta) * m_val
        A2 = A1 - sig
        B = 0.5 * sin_t * dm
        th_dc1 = thdth * A1 + theta * B             # theta * dc1
        th_dc2 = thdth * A2 + theta * B
        dw = 2.0 * n * n * thdth                    # d[(n theta)^2]
        djs0 = -0.25 * js1 * dw
        djs1 = -0.25 * js2 * dw
        dcos1 = -s1_over * th_dc1                   # -sin(c1) dc1
        dcos2 = -s2_over * th_dc2
        small = np.abs(theta) < 1e-8
        th_safe = np.where(small, 1.0, theta)
        lim1 = 0.5 * (sig * m_val / 3.0 + dm) + sig * base_ratio ** 3 / 3.0
        lim2 = 0.5 * (sig * m_val / 3.0 + dm) + sig * ratio2 ** 3 / 3.0
        ds1_over = np.where(
            small, lim1,
            (np.cos(c1) * th_dc1 - s1_over * thdth) / (th_safe * th_safe))
        ds2_over = np.where(
            small, lim2,
            (np.cos(c2) * th_dc2 - s2_over * thdth) / (th_safe * th_safe))
        dt_sin1 = thdth * s1_over + np.cos(c1) * th_dc1   # d[theta sin(c1)]
        dt_sin2 = thdth * s2_over + np.cos(c2) * th_dc2
        if endpoint == 1:
            dphi1 = ((dcos1 + (nu / n) * ds1_over) * js0
                     + (cos1 + (nu / n) * s1_over) * djs0
                     - 0.5 * n * (dt_sin1 * js1 + t_sin1 * djs1))
            dphi2 = ((dcos2 + (nu / n) * ds2_over) * js0
                     + (cos2 + (nu / n) * s2_over) * djs0
                     - 0.5 * n * (dt_sin2 * js1 + t_sin2 * djs1))
        else:
            dphi1 = ((dcos1 - (nu / n) * ds1_over) * js0
                     + (cos1 - (nu / n) * s1_over) * djs0
                     + 0.5 * n * (dt_sin1 * js1 + t_sin1 * djs1))
            dphi2 = -((dcos2 - (nu / n) * ds2_over) * js0
                      + (cos2 - (nu / n) * s2_over) * djs0
                      + 0.5 * n * (dt_sin2 * js1 + t_sin2 * djs1))
        # d log(theta^2/(-sig v)) = 2 dtheta/theta - 1/v; O(1) with an O(eps/v)
        # cancellation, replaced by its v -> 0 limit very close to the endpoint
        with np.errstate(divide="ignore", invalid="ignore"):
            dlog_ratio = (2.0 * thdth / (th_safe * th_safe)
                          - 1.0 / np.where(v == 0, 1.0, v))
        dlog_ratio = np.where(np.abs(v) < 1e-5, -sig / 6.0, dlog_ratio)
        dL = ((0.5 * nu + 0.25) * dlog_ratio
              - (0.5 * other + 0.25) * sig / (2.0 + sig * v)
              - 0.5 * self._dlogh(z))
        dK = (dr11 * dinf * phi1 + r11 * dinf * dphi1
              - 1j * dr12 / dinf * phi2 - 1j * r12 / dinf * dphi2)
        dval = sign * np.exp(L) * (dL * K + dK)
        return val, dval, est
