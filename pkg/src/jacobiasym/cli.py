"""Batch command-line front end.

Subcommands: eval (values/derivatives on point grids), coeffs (dump the
correction tables as JSON), quad (emit a Gauss rule), study (error-vs-n
convergence table against the recurrence oracle), selfcheck (golden and
property suites).  Output is CSV or JSON on stdout; exit code 2 flags a
configuration error, 3 a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import coeffs, contours, oracle, weights
from .contours import ContourParams
from .errors import JacobiAsymError
from .evaluate import Engine, RegionTag
from .quadrature import gauss_rule
from .weights import format_weight, parse_weight

_REGIONS = {
    "auto": None,
    "lens": RegionTag.LENS,
    "outer": RegionTag.OUTER,
    "rightdisk": RegionTag.RIGHT_DISK,
    "leftdisk": RegionTag.LEFT_DISK,
}


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _parse_points(text: str) -> np.ndarray:
    if text.startswith("linspace:"):
        _, a, b, count = text.split(":")
        return np.linspace(float(a), float(b), int(count)).astype(complex)
    vals = []
    for piece in text.split(","):
        piece = piece.strip().replace("i", "j")
        vals.append(complex(piece))
    return np.asarray(vals, dtype=complex)


def _parse_range(text: str):
    if ".." in text:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    v = int(text)
    return v, v


def _build_engine(args) -> Engine:
    spec = parse_weight(args.weight)
    params = ContourParams(rho=args.rho, Mmax=args.max_contour_points)
    return Engine(spec, terms=args.terms, disk_radius=args.disk_radius,
                  contour=params)


def _cmd_eval(args) -> int:
    engine = _build_engine(args)
    pts = _parse_points(args.points)
    region = _REGIONS[args.region]
    if args.derivative:
        res = engine.eval_derivative(args.n, pts, region=region,
                                     orthonormal=args.orthonormal)
    elif args.orthonormal:
        res = engine.eval_orthonormal(args.n, pts, region=region)
    else:
        res = engine.eval_monic(args.n, pts, region=region)
    vals = np.atleast_1d(res.value)
    tags = np.atleast_1d(res.region)
    rows = [{"point_re": p.real, "point_im": p.imag,
             "value_re": v.real, "value_im": v.imag,
             "region": t.value, "terms": res.terms_used}
            for p, v, t in zip(pts, vals, tags)]
    if args.format == "json":
        print(json.dumps(rows))
    else:
        print("point_re,point_im,value_re,value_im,region,terms")
        for r in rows:
            print(",".join([_fmt(r["point_re"]), _fmt(r["point_im"]),
                            _fmt(r["value_re"]), _fmt(r["value_im"]),
                            r["region"], str(r["terms"])]))
    return 0


def _cmd_coeffs(args) -> int:
    engine = _build_engine(args)
    doc = json.loads(coeffs.table_to_json(engine.table,
                                          weight_key=format_weight(engine.weight)))
    doc["aux"] = {
        "Dinf": engine.aux.Dinf,
        "cn": [[c.real, c.imag] for c in engine.aux.cn],
        "dn": [[d.real, d.imag] for d in engine.aux.dn],
        "rho_used": engine.aux.rho_used,
        "M_used": engine.aux.M_used,
    }
    print(json.dumps(doc))
    return 0


def _cmd_quad(args) -> int:
    engine = _build_engine(args)
    rule = gauss_rule(engine, args.n, terms=max(args.terms, 7))
    if args.format == "json":
        print(json.dumps({"n": rule.n, "method": rule.method,
                          "max_residual": rule.max_residual,
                          "nodes": rule.nodes.tolist(),
                          "weights": rule.weights.tolist()}))
    else:
        print("node,weight")
        for x, w in zip(rule.nodes, rule.weights):
            print(f"{_fmt(x)},{_fmt(w)}")
    return 0


def _cmd_study(args) -> int:
    engine = _build_engine(args)
    spec = engine.weight
    t_lo, t_hi = _parse_range(args.study_terms)
    n_lo, n_hi = _parse_range(args.n_range)
    ns = []
    n = n_lo
    while n <= n_hi:
        ns.append(n)
        n *= 2
    table = oracle.stieltjes(spec, max(ns) + 1)
    point = complex(args.point.replace("i", "j"))
    if point.imag == 0.0:
        point = point.real
    rows = []
    for T in range(t_lo, t_hi + 1):
        eng = Engine(spec, terms=T, disk_radius=args.disk_radius,
                     contour=ContourParams(rho=args.rho,
                                           Mmax=args.max_contour_points))
        for n in ns:
            exact = complex(np.asarray(oracle.eval_recurrence(table, n, point),
                                       dtype=complex))
            got = complex(np.atleast_1d(eng.eval_monic(n, point).value)[0])
            rel = abs(got - exact) / abs(exact)
            rows.append((n, T, rel))
    if args.format == "json":
        print(json.dumps([{"n": n, "T": T, "rel_error": e} for n, T, e in rows]))
    else:
        print("n,T,rel_error_vs_oracle")
        for n, T, e in rows:
            print(f"{n},{T},{_fmt(e)}")
    return 0


def selfcheck() -> dict:
    """Golden Appendix-style vectors, branch-cut grid, Chebyshev exactness."""
    report = {}
    # branch-cut grid identities
    from . import branches
    rng = np.random.default_rng(0)
    z = rng.uniform(-3, 3, 400) + 1j * rng.uniform(-3, 3, 400)
    z = z[np.abs(z.imag) > 1e-12]
    ph = branches.phi(z)
    ident = np.exp(1j * branches.theta(z) * branches.acos_cut(z)) - ph
    report["branch_identity"] = float(np.max(np.abs(ident)))
    report["phi_modulus_ok"] = bool(np.all(np.abs(ph) > 1.0))
    # golden coefficients (Legendre, exact closed forms for U_{1,1})
    spec = weights.WeightSpec(0.0, 0.0)
    aux = contours.build_aux(spec, 20)
    tab = coeffs.build_coeff_table(0.0, 0.0, aux.Dinf, aux.cn, aux.dn, T=2)
    gold = np.array([[-1, 1j], [1j, 1]], dtype=complex) * (-1.0 / 16.0)
    report["golden_u11"] = float(np.max(np.abs(tab.right.u(1, 1) - gold)))
    # Chebyshev exactness at one point
    eng = Engine(weights.WeightSpec(-0.5, -0.5), terms=1)
    got = complex(np.atleast_1d(eng.eval_monic(5, 0.3).value)[0])
    t5 = 16 * 0.3 ** 5 - 20 * 0.3 ** 3 + 5 * 0.3
    report["chebyshev_rel"] = abs(got - t5 / 16) / abs(t5 / 16)
    report["ok"] = bool(report["branch_identity"] < 1e-13
                        and report["phi_modulus_ok"]
                        and report["golden_u11"] < 1e-13
                        and report["chebyshev_rel"] < 1e-13)
    return report


def _cmd_selfcheck(args) -> int:
    report = selfcheck()
    print(json.dumps(report))
    return 0 if report["ok"] else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="jacobiasym",
        description="Asymptotic evaluation of generalized Jacobi-type "
                    "orthogonal polynomials and O(n) Gauss rules.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_weight=True):
        if need_weight:
            p.add_argument("--weight", required=True,
                           help='e.g. "jacobi(0,0) * exp(-7*x^4)"')
        p.add_argument("--terms", type=int, default=4)
        p.add_argument("--rho", type=float, default=None)
        p.add_argument("--disk-radius", dest="disk_radius", type=float,
                       default=0.2)
        p.add_argument("--max-contour-points", dest="max_contour_points",
                       type=int, default=2 ** 14)
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("eval", help="evaluate pi_n or p_n on points")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--points", required=True,
                   help="comma list (complex as re+imi) or linspace:a:b:count")
    p.add_argument("--region", choices=sorted(_REGIONS), default="auto")
    p.add_argument("--orthonormal", action="store_true")
    p.add_argument("--derivative", action="store_true")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("coeffs", help="dump coefficient tables as JSON")
    common(p)
    p.set_defaults(func=_cmd_coeffs)

    p = sub.add_parser("quad", help="emit an n-point Gauss rule")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_quad)

    p = sub.add_parser("study", help="error-vs-n table against the oracle")
    common(p)
    p.add_argument("--point", required=True)
    p.add_argument("--study-terms", dest="study_terms", default="1..5",
                   metavar="LO..HI")
    p.add_argument("--n", dest="n_range", default="16..512", metavar="LO..HI")
    p.set_defaults(func=_cmd_study)

    p = sub.add_parser("selfcheck", help="run built-in verification suites")
    p.set_defaults(func=_cmd_selfcheck)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command != "selfcheck":
            try:
                parse_weight(args.weight)
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 2
        return args.func(args)
    except (JacobiAsymError, ValueError) as exc:
        print(f"numerical failure in {args.command}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
