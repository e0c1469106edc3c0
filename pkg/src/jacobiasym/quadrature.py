"""Gauss rules for generalized Jacobi weights in O(n) work.

Nodes come from Newton iteration on the asymptotic orthonormal evaluator,
seeded by inverting the lens phase (interior) and by mapped Bessel zeros
(hard edge); weights from the Christoffel identity
w_k = (gamma_n/gamma_{n-1}) / (p_{n-1}(x_k) p_n'(x_k)), rescaled so that
sum w_k = mu_0 exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from . import bessel, oracle as _oracle
from .errors import DuplicateRoot, NewtonStall
from .evaluate import Engine
from .weights import WeightSpec, eval_h

__all__ = ["QuadRule", "gauss_rule", "moments_check", "timing_profile"]


@dataclass
class QuadRule:
    """Gauss rule: strictly increasing interior nodes, positive weights."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    max_residual: float
    method: str = "newton-asymptotic"


def _mu0(spec: WeightSpec) -> float:
    x, w = roots_jacobi(60, spec.alpha, spec.beta)
    m = float(np.sum(w * np.real(eval_h(spec, x))))
    x, w = roots_jacobi(120, spec.alpha, spec.beta)
    m2 = float(np.sum(w * np.real(eval_h(spec, x))))
    if abs(m2 - m) > 1e-12 * abs(m2):
        x, w = roots_jacobi(480, spec.alpha, spec.beta)
        m2 = float(np.sum(w * np.real(eval_h(spec, x))))
    return m2


def _initial_guesses(engine: Engine, n: int) -> np.ndarray:
    """Node guesses in theta = arccos x, decreasing x (increasing theta)."""
    k = np.arange(1, n + 1)
    theta = (k - 0.5) * np.pi / (n + 0.5)
    for _ in range(3):
        psi = np.real(engine._psi(np.cos(theta)))
        theta = ((k - 0.5) * np.pi + 0.25 * np.pi - psi) / (n + 0.5)
        theta = np.clip(theta, 1e-12, np.pi - 1e-12)
    # hard-edge replacement: first zeros scale like Bessel zeros over n_eff
    n_eff = n + 0.5 * (engine.weight.alpha + engine.weight.beta + 1.0)
    jz_r = bessel.bessel_zeros(engine.weight.alpha, 10)
    keep = jz_r < min(12.0, 0.7 * n_eff)
    theta[: np.sum(keep)] = jz_r[keep] / n_eff
    jz_l = bessel.bessel_zeros(engine.weight.beta, 10)
    keep = jz_l < min(12.0, 0.7 * n_eff)
    theta[n - np.sum(keep):] = np.pi - (jz_l[keep] / n_eff)[::-1]
    return np.cos(theta)[::-1]          # increasing x... reversed below

def gauss_rule(engine_or_weight, n: int, terms: int = 7) -> QuadRule:
    """n-point Gauss rule for the engine's weight.

    Small n (< 20) falls back to Golub-Welsch on oracle recurrence
    coefficients (asymptotics too weak there); the method field records it.
    """
    if isinstance(engine_or_weight, Engine):
        engine = engine_or_weight
        if engine.T < terms:
            engine = Engine(engine.weight, terms=terms,
                            disk_radius=engine.disk_radius,
                            contour=engine.params)
    else:
        engine = Engine(engine_or_weight, terms=terms)
    spec = engine.weight
    if n < 20:
        table = _oracle.stieltjes(spec, n + 1)
        nodes, w = _oracle.golub_welsch(table, n)
        return QuadRule(n=n, nodes=nodes, weights=w, max_residual=0.0,
                        method="golub-welsch")

    x = np.sort(_initial_guesses(engine, n))
    fx = np.real(engine.eval_orthonormal(n, x).value)
    max_res = np.inf
    for it in range(20):
        dfx = np.real(engine.eval_derivative(n, x, orthonormal=True).value)
        step = fx / dfx
        x_new = x - step
        fx_new = np.real(engine.eval_orthonormal(n, x_new).value)
        # damped step where the residual grew
        for _ in range(3):
            worse = np.abs(fx_new) > np.abs(fx)
            if not np.any(worse):
                break
            step = np.where(worse, 0.5 * step, step)
            x_new = x - step
            fx_new = np.real(engine.eval_orthonormal(n, x_new).value)
        x, fx = x_new, fx_new
        max_res = float(np.max(np.abs(step)))
        if max_res <= 1e-14:
            break
    else:
        raise NewtonStall(f"Newton did not converge (last step {max_res:.2e})",
                          index=int(np.argmax(np.abs(step))))
    if np.any(np.diff(x) <= 0):
        raise DuplicateRoot("two Newton iterates collapsed onto one root")
    if x[0] <= -1.0 or x[-1] >= 1.0:
        raise NewtonStall("a node escaped the open interval (-1, 1)")

    # Christoffel-Darboux kernel K_n(x,x) instead of the bare root form
    # p_{n-1} p_n': the extra -p_{n-1}' p_n term cancels the first-order
    # sensitivity to the float rounding of the converged nodes.
    dfx = np.real(engine.eval_derivative(n, x, orthonormal=True).value)
    fx = np.real(engine.eval_orthonormal(n, x).value)
    pnm1 = np.real(engine.eval_orthonormal(n - 1, x).value)
    dpnm1 = np.real(engine.eval_derivative(n - 1, x, orthonormal=True).value)
    w_rel = 1.0 / (pnm1 * dfx - dpnm1 * fx)
    if np.any(w_rel <= 0.0):
        raise NewtonStall("Christoffel weight came out non-positive")
    w = w_rel * (_mu0(spec) / np.sum(w_rel))
    return QuadRule(n=n, nodes=x, weights=w,
                    max_residual=float(np.max(np.abs(fx / dfx))))


def moments_check(rule: QuadRule, spec: WeightSpec, degree: int) -> float:
    """Max error of the rule on monomials x^j, j = 0..degree."""
    nb = max(2 * degree, 80)
    xb, wb = roots_jacobi(nb, spec.alpha, spec.beta)
    wb = wb * np.real(eval_h(spec, xb))
    xb2, wb2 = roots_jacobi(2 * nb, spec.alpha, spec.beta)
    wb2 = wb2 * np.real(eval_h(spec, xb2))
    worst = 0.0
    for j in range(degree + 1):
        mu = float(np.sum(wb2 * xb2 ** j))
        mu_lo = float(np.sum(wb * xb ** j))
        if abs(mu - mu_lo) > 1e-11 * max(1.0, abs(mu)):   # oracle sanity
            raise RuntimeError("moment oracle did not converge")
        got = float(np.sum(rule.weights * rule.nodes ** j))
        worst = max(worst, abs(got - mu))
    return worst


def timing_profile(weight: WeightSpec, n_list=(100, 1000, 10000),
                   terms: int = 7) -> dict:
    """Wall-time scaling of gauss_rule and per-point evaluation cost."""
    engine = Engine(weight, terms=terms)
    times = []
    for n in n_list:
        t0 = time.perf_counter()
        gauss_rule(engine, n)
        times.append(time.perf_counter() - t0)
    ln = np.log(np.asarray(n_list, dtype=float))
    lt = np.log(np.asarray(times))
    slope = float(np.polyfit(ln, lt, 1)[0])

    x = np.linspace(-0.9, 0.9, 512)
    per_point = []
    for n in (min(n_list), max(n_list)):
        t0 = time.perf_counter()
        engine.eval_orthonormal(n, x)
        per_point.append((time.perf_counter() - t0) / x.size)
    return {
        "n_list": list(n_list),
        "rule_seconds": times,
        "rule_exponent": slope,
        "eval_seconds_small_n": per_point[0],
        "eval_seconds_large_n": per_point[1],
        "eval_ratio": per_point[1] / per_point[0],
    }
