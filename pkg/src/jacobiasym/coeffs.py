"""Higher-order correction data for the matrix R(z).

Everything here works with the local Laurent/Taylor data of the jump terms
at the two endpoints:

  * W[k][m]: Laurent coefficients of the simplified jump terms s_k(z),
  * U[k][m]: pole coefficients of R_k outside the disks,
  * Q[k][n]: Taylor coefficients of R_k inside the disks,

computed by explicit convolution recursions (no symbolic algebra), plus
direct pointwise evaluation of the unsimplified jump terms Delta_k(z)
used by the disk evaluator and as a small-k cross-check.

Endpoint convention: sigma = +2 for the right disk (local variable
v = z-1, parameter q = alpha), sigma = -2 for the left (v = z+1,
q = beta).  All stored matrices carry the D_infinity^{sigma_3}
conjugation already applied.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _series, branches
from ._series import conv, pochhammer
from .errors import InsufficientCoefficients

__all__ = [
    "bracket",
    "logphi_series",
    "rho_series",
    "EndpointTables",
    "CoeffTable",
    "build_coeff_table",
    "delta_direct",
    "delta_direct_deriv",
    "s_direct",
    "s_direct_deriv",
    "delta_matrix_form",
    "crosscheck_jump",
    "table_to_json",
    "table_from_json",
]

_I2 = np.eye(2, dtype=complex)


def bracket(q: float, m: int) -> float:
    """(q, m) = prod_{n=1..m} (4q^2 - (2n-1)^2) / (2^(2m) m!), with (q, 0) = 1."""
    if m < 0:
        raise ValueError("m must be >= 0")
    out = 1.0
    for n in range(1, m + 1):
        out *= 4.0 * q * q - (2 * n - 1) ** 2
    return out / (2.0 ** (2 * m) * math.factorial(m))


def logphi_series(T: int, n_terms: int | None = None):
    """f_n and g_{k,n} tables for both endpoints.

    Returns {'right': (f, g), 'left': (f, g)} with g[k] the coefficient
    array of (log(+-phi))^(-k) relative to (sigma*v)^(-k/2).
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    n_terms = n_terms or (2 * T + 6)
    out = {}
    for name, sigma in (("right", 2.0), ("left", -2.0)):
        f = _series.logphi_f(n_terms, sigma)
        out[name] = (f, _series.g_tables(T, n_terms, f))
    return out


def rho_series(cs, gamma: float, k_max: int, n_terms: int, sigma: float):
    """Tables rho[k][n] of y_gamma^k relative to (-i)^k (sigma*v)^(k/2).

    cs holds the endpoint Taylor data of m(z) (c_n on the right, d_n on
    the left); gamma is the log(+-phi) multiplier.
    """
    if n_terms > len(cs):
        raise InsufficientCoefficients(
            f"need {n_terms} m-coefficients, have {len(cs)}")
    f = _series.logphi_f(n_terms, sigma)
    eps = 1.0 if sigma > 0 else -1.0
    rho1 = gamma * f.astype(complex) + eps * conv(
        _series.binom_half(n_terms, sigma), np.asarray(cs[:n_terms], dtype=complex),
        n_terms)
    delta0 = np.zeros(n_terms, dtype=complex)
    delta0[0] = 1.0
    tables = [delta0, rho1]
    for k in range(2, k_max + 1):
        tables.append(conv(tables[-1], rho1, n_terms))
    return tables


def _h_series(rho_tables, n_terms, sigma):
    """H^odd (cos) and H^even (sin) coefficient arrays from the rho tables."""
    hodd = np.zeros(n_terms, dtype=complex)
    hev = np.zeros(n_terms, dtype=complex)
    for n in range(n_terms):
        so = 0.0 + 0.0j
        se = 0.0 + 0.0j
        for p in range(n + 1):
            so += sigma ** p * rho_tables[2 * p][n - p] / math.factorial(2 * p)
            se += sigma ** p * rho_tables[2 * p + 1][n - p] / math.factorial(2 * p + 1)
        hodd[n] = so
        hev[n] = se
    return hodd, hev


def _conv_mat(scalar, mats, n_terms):
    """Cauchy product of a scalar series with a (N, 2, 2) matrix series."""
    out = np.zeros((n_terms, 2, 2), dtype=complex)
    for n in range(n_terms):
        for j in range(min(n, len(scalar) - 1) + 1):
            if n - j < len(mats):
                out[n] += scalar[j] * mats[n - j]
    return out


def _dconj(mat, dinf):
    """D_infinity^{sigma_3} X D_infinity^{-sigma_3} on stacked 2x2 arrays."""
    out = np.array(mat, dtype=complex, copy=True)
    out[..., 0, 1] *= dinf ** 2
    out[..., 1, 0] /= dinf ** 2
    return out


@dataclass
class EndpointTables:
    """Per-endpoint Laurent/Taylor tables (D-conjugated)."""

    sigma: float
    q: float
    m_hi: int
    W: dict = field(default_factory=dict)   # k -> (m_hi + ceil(k/2) + 1, 2, 2)
    U: dict = field(default_factory=dict)   # k -> (ceil(k/2), 2, 2), index i <-> m = i+1
    Q: dict = field(default_factory=dict)   # k -> (n_max + 1, 2, 2)

    def w(self, k, m):
        off = (k + 1) // 2
        if m < -off or m > self.m_hi:
            raise InsufficientCoefficients(f"W[{k}][{m}] outside stored range")
        return self.W[k][m + off]

    def u(self, k, m):
        if k == 0:
            return np.zeros((2, 2), dtype=complex)
        return self.U[k][m - 1]


@dataclass
class CoeffTable:
    """All correction data for one weight at expansion depth T."""

    alpha: float
    beta: float
    Dinf: float
    T: int
    n_max: int
    cn: np.ndarray
    dn: np.ndarray
    right: EndpointTables
    left: EndpointTables

    def endpoint(self, which):
        return self.right if which in (1, "right") else self.left


def _build_g_matrices(q, ab, sigma, cs, T, n_terms):
    """Expansion-coefficient matrices of G_k around the endpoint.

    Returns (godd, geven): dicts k -> (n_terms, 2, 2) arrays, where the odd
    table carries the coefficients relative to the extra V^(-1) half-power.
    """
    eps = 1.0 if sigma > 0 else -1.0
    rho_tabs = rho_series(cs, ab, 2 * n_terms + 1, n_terms, sigma)
    hodd, hev = _h_series(rho_tabs, n_terms, sigma)
    bm = _series.binom_mhalf(n_terms, sigma).astype(complex)
    t = _series.t_ratio(n_terms, sigma).astype(complex)
    c_ser = conv(bm, hodd, n_terms)
    th_ser = conv(t, hodd, n_terms)
    sb_ser = conv(bm, hev, n_terms)
    ts_ser = conv(t, hev, n_terms)
    hev_shift = np.concatenate(([0.0], hev[:-1]))

    godd, geven = {}, {}
    for k in range(1, T + 1):
        a = (q * q + 0.5 * k - 0.25) / k
        b = -1j * (k - 0.5) if sigma > 0 else 1j * (k - 0.5)
        if k % 2:
            g = np.zeros((n_terms, 2, 2), dtype=complex)
            g[:, 0, 0] = -a * t + 1j * b * eps * c_ser
            g[:, 0, 1] = 1j * a * eps * bm + b * th_ser + b * sigma * hev_shift
            g[:, 1, 0] = 1j * a * eps * bm + b * th_ser - b * sigma * hev_shift
            g[:, 1, 1] = -g[:, 0, 0]
            godd[k] = g
        else:
            g = np.zeros((n_terms, 2, 2), dtype=complex)
            g[:, 0, 0] = 1j * b * eps * sb_ser
            g[0, 0, 0] += a
            g[:, 0, 1] = b * (hodd + ts_ser)
            g[:, 1, 0] = b * (-hodd + ts_ser)
            g[:, 1, 1] = -1j * b * eps * sb_ser
            g[0, 1, 1] += a
            geven[k] = g
    return godd, geven


def build_coeff_table(alpha: float, beta: float, Dinf: float, cn, dn,
                      T: int = 4, n_max: int | None = None) -> CoeffTable:
    """Compute W, U, Q through order T per the explicit convolution recursion."""
    if T < 1:
        raise ValueError("T must be >= 1")
    n_max = (T + 2) if n_max is None else n_max
    m_hi = n_max + (T + 1) // 2 + 1
    n_terms = m_hi + (T + 1) // 2 + 2
    ab = alpha + beta
    cn = np.asarray(cn, dtype=complex)
    dn = np.asarray(dn, dtype=complex)
    if len(cn) < n_terms or len(dn) < n_terms:
        raise InsufficientCoefficients(
            f"need {n_terms} c_n/d_n coefficients, have {len(cn)}/{len(dn)}")

    ends = {}
    for name, sigma, q, cs in (("right", 2.0, alpha, cn), ("left", -2.0, beta, dn)):
        f = _series.logphi_f(n_terms, sigma)
        g = _series.g_tables(T, n_terms, f)
        godd, geven = _build_g_matrices(q, ab, sigma, cs, T, n_terms)
        tab = EndpointTables(sigma=sigma, q=q, m_hi=m_hi)
        for k in range(1, T + 1):
            off = (k + 1) // 2
            Wk = np.zeros((m_hi + off + 1, 2, 2), dtype=complex)
            br = bracket(q, k - 1)
            if k % 2:
                pref = br * 2.0 ** (-k) * (1.0 / sigma) ** ((k + 1) // 2)
                series = _conv_mat(np.asarray(g[k]), godd[k], n_terms)
                for m in range(-off, m_hi + 1):
                    Wk[m + off] = pref * series[m + off]
            else:
                pref = br * 2.0 ** (-k) * (1.0 / sigma) ** (k // 2)
                series = _conv_mat(np.asarray(g[k]), geven[k], n_terms)
                shift = (4.0 * q * q + 2 * k - 1) / (2.0 * k)
                for m in range(-off, m_hi + 1):
                    Wk[m + off] = pref * (series[m + off] - shift * g[k][m + off] * _I2)
            tab.W[k] = _dconj(Wk, Dinf)
        ends[name] = tab

    right, left = ends["right"], ends["left"]

    def taylor_ro(tab_same, tab_opp, kk, n):
        """Taylor coefficient at v^n of R^O_kk near tab_same's endpoint."""
        if kk == 0:
            return _I2 if n == 0 else np.zeros((2, 2), dtype=complex)
        sigma = tab_same.sigma
        out = np.zeros((2, 2), dtype=complex)
        for i in range(1, (kk + 1) // 2 + 1):
            out += (pochhammer(1 - i - n, n) * sigma ** (-i - n)
                    / math.factorial(n)) * tab_opp.u(kk, i)
        return out

    for k in range(1, T + 1):
        for tab_same, tab_opp in ((right, left), (left, right)):
            kk_pole = (k + 1) // 2
            Uk = np.zeros((kk_pole, 2, 2), dtype=complex)
            for m in range(1, kk_pole + 1):
                acc = tab_same.w(k, -m).copy()
                for j in range(1, k):
                    for l in range(max(m - (j + 1) // 2, 1), (k - j + 1) // 2 + 1):
                        acc += tab_same.u(k - j, l) @ tab_same.w(j, l - m)
                    for n in range((j + 1) // 2 - m + 1):
                        acc += taylor_ro(tab_same, tab_opp, k - j, n) @ tab_same.w(j, -n - m)
                Uk[m - 1] = acc
            tab_same.U[k] = Uk

    for k in range(1, T + 1):
        for tab_same, tab_opp in ((right, left), (left, right)):
            Qk = np.zeros((n_max + 1, 2, 2), dtype=complex)
            for n in range(n_max + 1):
                acc = taylor_ro(tab_same, tab_opp, k, n).copy()
                for j in range(1, k + 1):
                    for l in range(1, (k - j + 1) // 2 + 1):
                        acc -= tab_same.u(k - j, l) @ tab_same.w(j, n + l)
                    for p in range(n + (j + 1) // 2 + 1):
                        acc -= taylor_ro(tab_same, tab_opp, k - j, p) @ tab_same.w(j, n - p)
                Qk[n] = acc
            tab_same.Q[k] = Qk

    return CoeffTable(alpha=alpha, beta=beta, Dinf=Dinf, T=T, n_max=n_max,
                      cn=cn, dn=dn, right=right, left=left)


# ---------------------------------------------------------------------------
# direct pointwise evaluation of Delta_k / s_k and derivatives

def _logphi_pm(z, endpoint):
    """log(phi) near +1, log(-phi) near -1 (principal logs; single-valued there)."""
    ph = branches.phi(z)
    return np.log(ph) if endpoint == 1 else np.log(-ph)


def _g_entries(k, z, endpoint, alpha, beta, m_val):
    q = alpha if endpoint == 1 else beta
    ab = alpha + beta
    sq = branches.sqrt_zm1_zp1(z)
    logpm = _logphi_pm(z, endpoint)
    y = -1j * (ab * logpm + sq * np.asarray(m_val, dtype=complex))
    a = (q * q + 0.5 * k - 0.25) / k
    b = -1j * (k - 0.5) if endpoint == 1 else 1j * (k - 0.5)
    cy, sy = np.cos(y), np.sin(y)
    zc = np.asarray(z, dtype=complex)
    if k % 2:
        g11 = (-a * zc + 1j * b * cy) / sq
        g12 = (1j * a + b * zc * cy) / sq + 1j * b * sy
        g21 = (1j * a + b * zc * cy) / sq - 1j * b * sy
        g22 = -g11
    else:
        g11 = a - b * sy / sq
        g12 = b * (cy + 1j * zc * sy / sq)
        g21 = b * (-cy + 1j * zc * sy / sq)
        g22 = a + b * sy / sq
    return g11, g12, g21, g22, sq, logpm, y, a, b, cy, sy


def _stack(g11, g12, g21, g22):
    out = np.empty(np.broadcast(g11, g22).shape + (2, 2), dtype=complex)
    out[..., 0, 0] = g11
    out[..., 0, 1] = g12
    out[..., 1, 0] = g21
    out[..., 1, 1] = g22
    return out


def delta_direct(k, z, endpoint, alpha, beta, dinf, m_val):
    """Delta_k(z) at one endpoint, from the worked-out entries of G_k."""
    q = alpha if endpoint == 1 else beta
    g11, g12, g21, g22, sq, logpm, *_ = _g_entries(k, z, endpoint, alpha, beta, m_val)
    pref = bracket(q, k - 1) / (2.0 * logpm) ** k
    return _dconj(pref[..., None, None] * _stack(g11, g12, g21, g22), dinf)


def s_direct(k, z, endpoint, alpha, beta, dinf, m_val):
    """Simplified jump term s_k(z): Delta_k minus the even-k scalar shift."""
    out = delta_direct(k, z, endpoint, alpha, beta, dinf, m_val)
    if k % 2 == 0:
        q = alpha if endpoint == 1 else beta
        logpm = _logphi_pm(z, endpoint)
        shift = ((4.0 * q * q + 2 * k - 1) * bracket(q, k - 1)
                 / (2.0 ** (k + 1) * k) / logpm ** k)
        out = out - shift[..., None, None] * _I2
    return out


def delta_direct_deriv(k, z, endpoint, alpha, beta, dinf, m_val, dm_val):
    """d/dz of Delta_k(z)."""
    q = alpha if endpoint == 1 else beta
    ab = alpha + beta
    zc = np.asarray(z, dtype=complex)
    g11, g12, g21, g22, sq, logpm, y, a, b, cy, sy = _g_entries(
        k, z, endpoint, alpha, beta, m_val)
    m_val = np.asarray(m_val, dtype=complex)
    dm_val = np.asarray(dm_val, dtype=complex)
    dy = -1j * (ab / sq + zc * m_val / sq + sq * dm_val)
    dcy, dsy = -sy * dy, cy * dy
    if k % 2:
        dg11 = (-a + 1j * b * dcy) / sq - (-a * zc + 1j * b * cy) * zc / sq ** 3
        core = (b * cy + b * zc * dcy) / sq - (1j * a + b * zc * cy) * zc / sq ** 3
        dg12 = core + 1j * b * dsy
        dg21 = core - 1j * b * dsy
        dg22 = -dg11
    else:
        dg11 = -b * (dsy / sq - sy * zc / sq ** 3)
        core = 1j * b * (sy / sq + zc * dsy / sq - zc * zc * sy / sq ** 3)
        dg12 = b * dcy + core
        dg21 = -b * dcy + core
        dg22 = -dg11
    pref = bracket(q, k - 1) / (2.0 * logpm) ** k
    dpref = -k * pref / (sq * logpm)
    g = _stack(g11, g12, g21, g22)
    dg = _stack(dg11, dg12, dg21, dg22)
    return _dconj(dpref[..., None, None] * g + pref[..., None, None] * dg, dinf)


def s_direct_deriv(k, z, endpoint, alpha, beta, dinf, m_val, dm_val):
    """d/dz of s_k(z)."""
    out = delta_direct_deriv(k, z, endpoint, alpha, beta, dinf, m_val, dm_val)
    if k % 2 == 0:
        q = alpha if endpoint == 1 else beta
        sq = branches.sqrt_zm1_zp1(z)
        logpm = _logphi_pm(z, endpoint)
        c0 = (4.0 * q * q + 2 * k - 1) * bracket(q, k - 1) / (2.0 ** (k + 1) * k)
        dshift = -k * c0 / (logpm ** (k + 1) * sq)
        out = out - dshift[..., None, None] * _I2
    return out


def delta_matrix_form(k, z, endpoint, alpha, beta, dinf, psi_val):
    """Delta_k via the literal matrix product M F^{s3} A F^{-s3} M^{-1}.

    Independent of the entrywise reduction; used as a cross-check oracle.
    """
    zc = np.asarray(z, dtype=complex)
    q = alpha if endpoint == 1 else beta
    gam = ((zc - 1.0) / (zc + 1.0)) ** 0.25
    u, w = gam + 1.0 / gam, gam - 1.0 / gam
    M = 0.5 * _stack(u, -1j * w, 1j * w, u)
    Minv = 0.5 * _stack(u, 1j * w, -1j * w, u)
    th = branches.theta(zc)
    shift = 0.5 * alpha * np.pi if endpoint == 1 else -0.5 * beta * np.pi
    F2 = np.exp(2j * th * (np.asarray(psi_val, dtype=complex) + shift))
    a = (q * q + 0.5 * k - 0.25) / k
    b = -1j * (k - 0.5) if endpoint == 1 else 1j * (k - 0.5)
    inner = _stack((-1.0) ** k * a * np.ones_like(zc),
                   b * F2,
                   (-1.0) ** (k + 1) * b / F2,
                   a * np.ones_like(zc))
    logpm = _logphi_pm(zc, endpoint)
    pref = bracket(q, k - 1) / (2.0 * logpm) ** k
    out = M @ inner @ Minv
    return _dconj(pref[..., None, None] * out, dinf)


def ro_outer(table: CoeffTable, z, k_max: int | None = None):
    """R^O_k(z) for k = 1..k_max from the pole tables (exact rational form)."""
    k_max = k_max or table.T
    zc = np.asarray(z, dtype=complex)
    out = []
    for k in range(1, k_max + 1):
        acc = np.zeros(zc.shape + (2, 2), dtype=complex)
        for m in range(1, (k + 1) // 2 + 1):
            acc += (table.right.u(k, m) / (zc - 1.0)[..., None, None] ** m
                    + table.left.u(k, m) / (zc + 1.0)[..., None, None] ** m)
        out.append(acc)
    return out


def _r_inside_from_s(table, ring, endpoint, s_terms, k):
    """R_k^{right/left} on the ring via the simplified jump relation."""
    ro = ro_outer(table, ring, k)
    r_in = ro[k - 1].copy()
    for m in range(1, k + 1):
        prev = ro[k - m - 1] if k - m >= 1 else np.broadcast_to(
            _I2, r_in.shape).copy()
        r_in = r_in - prev @ s_terms[m]
    return r_in


def crosscheck_jump(table: CoeffTable, psi_fn, m_fn, k_small: int = 3,
                    ring_radius: float = 0.5, n_points: int = 24) -> dict:
    """Validate the tables against the unsimplified jump recursion.

    Builds Delta_k by the literal matrix form of the jump terms, forms
    s_k by the recursive definition s_k = Delta_k - sum_j s_j Delta_{k-j},
    assembles R_k^{right/left} = R_k^O - sum R^O s, and reports

      * tsimpl_residual: recursive s against the closed-form s,
      * pole_residual:   Laurent principal part of R_k^{right/left}
                         extracted on the ring (must vanish; pins U),
      * series_residual: R_k^{right/left} against the stored Taylor
                         series Q, on a smaller ring inside the disk.
    """
    k_small = min(k_small, table.T)
    t = 2 * np.pi * np.arange(n_points) / n_points
    report = {"tsimpl_residual": 0.0, "pole_residual": 0.0, "series_residual": 0.0}
    for endpoint in (1, -1):
        for radius, do_pole in ((ring_radius, True), (0.2 * ring_radius, False)):
            ring = endpoint + radius * np.exp(1j * t)
            psi_v = psi_fn(ring)
            m_v = m_fn(ring)
            deltas = [None] + [delta_matrix_form(k, ring, endpoint, table.alpha,
                                                 table.beta, table.Dinf, psi_v)
                               for k in range(1, k_small + 1)]
            s_rec = [None, deltas[1]]
            for m in range(2, k_small + 1):
                acc = deltas[m].copy()
                for j in range(1, m):
                    acc -= s_rec[j] @ deltas[m - j]
                s_rec.append(acc)
            for m in range(1, k_small + 1):
                closed = s_direct(m, ring, endpoint, table.alpha, table.beta,
                                  table.Dinf, m_v)
                report["tsimpl_residual"] = max(
                    report["tsimpl_residual"],
                    float(np.max(np.abs(s_rec[m] - closed))))
            tab = table.endpoint(endpoint)
            v = ring - endpoint
            for k in range(1, k_small + 1):
                r_in = _r_inside_from_s(table, ring, endpoint, s_rec, k)
                if do_pole:
                    phase = np.exp(1j * t)
                    for m in range(1, (k + 1) // 2 + 1):
                        coef = (radius ** m / n_points) * np.einsum(
                            "p,pij->ij", phase ** m, r_in)
                        report["pole_residual"] = max(
                            report["pole_residual"], float(np.max(np.abs(coef))))
                else:
                    q_sum = np.zeros_like(r_in)
                    for n in range(table.n_max + 1):
                        q_sum += tab.Q[k][n] * (v ** n)[..., None, None]
                    report["series_residual"] = max(
                        report["series_residual"],
                        float(np.max(np.abs(r_in - q_sum))))
    return report


# ---------------------------------------------------------------------------
# serialization

_FORMAT_VERSION = 1


def _mat_to_list(a):
    return [np.asarray(a).real.tolist(), np.asarray(a).imag.tolist()]


def _mat_from_list(pair):
    return np.asarray(pair[0]) + 1j * np.asarray(pair[1])


def table_to_json(table: CoeffTable, weight_key: str = "") -> str:
    """Versioned JSON dump of a coefficient table."""
    def end_dict(tab):
        return {
            "sigma": tab.sigma, "q": tab.q, "m_hi": tab.m_hi,
            "W": {str(k): _mat_to_list(v) for k, v in tab.W.items()},
            "U": {str(k): _mat_to_list(v) for k, v in tab.U.items()},
            "Q": {str(k): _mat_to_list(v) for k, v in tab.Q.items()},
        }
    doc = {
        "format_version": _FORMAT_VERSION,
        "key": {"alpha": table.alpha, "beta": table.beta,
                "weight": weight_key, "T": table.T},
        "Dinf": table.Dinf, "n_max": table.n_max,
        "cn": _mat_to_list(table.cn), "dn": _mat_to_list(table.dn),
        "right": end_dict(table.right), "left": end_dict(table.left),
    }
    return json.dumps(doc)


def table_from_json(text: str) -> CoeffTable:
    doc = json.loads(text)
    if doc.get("format_version") != _FORMAT_VERSION:
        raise ValueError("unsupported coefficient-table format version")

    def end_from(d):
        tab = EndpointTables(sigma=d["sigma"], q=d["q"], m_hi=d["m_hi"])
        tab.W = {int(k): _mat_from_list(v) for k, v in d["W"].items()}
        tab.U = {int(k): _mat_from_list(v) for k, v in d["U"].items()}
        tab.Q = {int(k): _mat_from_list(v) for k, v in d["Q"].items()}
        return tab

    key = doc["key"]
    return CoeffTable(alpha=key["alpha"], beta=key["beta"], Dinf=doc["Dinf"],
                      T=key["T"], n_max=doc["n_max"],
                      cn=_mat_from_list(doc["cn"]), dn=_mat_from_list(doc["dn"]),
                      right=end_from(doc["right"]), left=end_from(doc["left"]))
