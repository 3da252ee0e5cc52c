"""Command-line interface: validation, curvature reports, certification,
flows, multi-start descent search, fingerprints and catalog presets.

Exit codes: 0 success (pass / Minimal / converged / Distinct), 1 failed
checks or computational errors, 2 unparseable input or bad request, 3 a
clean run whose outcome is negative (NotCertified, no descent, or
Indistinguishable).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.linalg import expm

from . import __version__
from .algebra_core import Bracket, Metric, act, lower_central_dims
from .catalog import catalog_get, catalog_list
from .curvature import curvature_report
from .defaults import TOL_COMPAT, TOL_JACOBI, certification_tolerance
from .errors import NilmetricError, ParseError
from .flows import FlowConfig, bracket_descent, metric_flow
from .minimality import certify_minimal, distinguish, fingerprint
from .problemfile import jsonable, load_problem, point_to_problem
from .structures import structure_group_basis


def _emit(payload: dict):
    print(json.dumps(jsonable(payload), indent=2, sort_keys=True))


def _header() -> dict:
    return {"format": 1, "tool": f"nilmetric {__version__}"}


def cmd_check(args) -> int:
    problem = load_problem(args.file)
    tensor = problem.tensor
    norm2 = tensor.norm2()
    from .algebra_core import jacobi_residual
    from .structures import compatibility_residual, integrability_residual

    jac = jacobi_residual(tensor)
    lcs = lower_central_dims(tensor)
    nilpotent = lcs[-1] == 0
    integ = integrability_residual(problem.structure, tensor)
    compat = compatibility_residual(problem.structure, problem.metric)
    checks = {
        "jacobi": bool(jac <= TOL_JACOBI * (1.0 + norm2)),
        "nilpotent": bool(nilpotent),
        "integrability": bool(integ <= 1e-8 * (1.0 + norm2)),
        "compatibility": bool(compat <= TOL_COMPAT),
    }
    report = _header()
    report.update({
        "dim": problem.dim,
        "jacobi_residual": jac,
        "lcs_dims": lcs,
        "nilpotent": nilpotent,
        "nilpotency_index": len(lcs) - 1 if nilpotent else None,
        "integrability_residual": integ,
        "compatibility_residual": compat,
        "checks": checks,
        "pass": all(checks.values()),
    })
    _emit(report)
    return 0 if report["pass"] else 1


def cmd_curvature(args) -> int:
    problem = load_problem(args.file)
    report = curvature_report(problem.tensor, problem.metric, problem.structure)
    payload = _header()
    payload.update({
        "dim": problem.dim,
        "ric": report.ric,
        "scal": report.scal,
        "ric_gamma": report.ric_gamma,
        "moment": report.moment,
        "F_value": report.F_value,
        "eigen_ric": report.eigen_ric,
        "eigen_ric_gamma": report.eigen_ric_gamma,
    })
    _emit(payload)
    return 0


def _problem_tolerance(problem, args) -> float:
    if getattr(args, "tol", None) is not None:
        return args.tol
    if "tol" in problem.options:
        return float(problem.options["tol"])
    return certification_tolerance()


def cmd_certify(args) -> int:
    problem = load_problem(args.file)
    tol = _problem_tolerance(problem, args)
    cert = certify_minimal(problem.tensor, problem.metric, problem.structure,
                           tol=tol)
    payload = _header()
    payload.update({
        "c": cert.c,
        "D": cert.D,
        "residual": cert.residual,
        "verdict": cert.verdict,
        "tolerance": cert.tolerance,
    })
    _emit(payload)
    return 0 if cert.minimal else 3


def cmd_flow(args) -> int:
    problem = load_problem(args.file)
    cfg = FlowConfig(step=args.step, horizon=args.horizon, sign=args.sign,
                     renorm=not args.unnormalized,
                     integrator=args.integrator)
    trace = metric_flow(problem.tensor, problem.structure, problem.metric,
                        cfg, normalized=not args.unnormalized)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "scal", "F", "cert_residual"])
            for row in trace.samples:
                writer.writerow([f"{v:.17g}" for v in row])
    first = trace.samples[0]
    last = trace.samples[-1]
    payload = _header()
    payload.update({
        "steps": len(trace.samples) - 1,
        "t_final": last[0],
        "scal_initial": first[1],
        "scal_final": last[1],
        "F_initial": first[2],
        "F_final": last[2],
        "cert_residual_final": last[3],
        "converged": trace.converged,
        "normalized": not args.unnormalized,
        "sign": args.sign,
    })
    _emit(payload)
    return 0 if trace.converged else 3


def _search_one(index: int, tensor, structure, basis, seed_seq, cfg, scale):
    rng = np.random.default_rng(seed_seq)
    if index == 0 or not basis:
        start = tensor
    else:
        coeffs = rng.standard_normal(len(basis))
        xi = sum(c * B for c, B in zip(coeffs, basis))
        norm = np.linalg.norm(xi)
        if norm > 0:
            xi = (scale / norm) * xi
        start = act(expm(xi), tensor)
    trace = bracket_descent(start, structure, cfg)
    final = trace.final_state
    cert = certify_minimal(final, Metric.identity(final.dim), structure)
    return {
        "start": index,
        "converged": trace.converged,
        "no_descent": trace.no_descent,
        "iterations": len(trace.samples) - 1,
        "F_final": trace.samples[-1][2],
        "residual": cert.residual,
        "verdict": cert.verdict,
        "c": cert.c,
        "_final": final,
        "_cert": cert,
    }


def cmd_search(args) -> int:
    problem = load_problem(args.file)
    tensor = problem.tensor.scaled(1.0 / problem.tensor.norm()) \
        if problem.tensor.norm() > 0 else problem.tensor
    basis = structure_group_basis(problem.structure,
                                  Metric.identity(problem.dim))
    cfg = FlowConfig(tol_converge=args.tol_converge, max_iter=args.max_iter)
    children = np.random.SeedSequence(args.seed).spawn(args.starts)
    with ThreadPoolExecutor(max_workers=min(args.starts, 8)) as pool:
        results = list(pool.map(
            lambda k: _search_one(k, tensor, problem.structure, basis,
                                  children[k], cfg, args.perturbation),
            range(args.starts),
        ))
    best = min(results, key=lambda r: (not r["converged"], r["F_final"]))
    cert = best["_cert"]
    payload = _header()
    payload.update({
        "starts": [{k: v for k, v in r.items() if not k.startswith("_")}
                   for r in results],
        "best": {
            "start": best["start"],
            "F_final": best["F_final"],
            "converged": best["converged"],
            "certificate": {
                "c": cert.c,
                "D": cert.D,
                "residual": cert.residual,
                "verdict": cert.verdict,
                "tolerance": cert.tolerance,
            },
            "bracket": best["_final"],
        },
    })
    _emit(payload)
    return 0 if best["converged"] and cert.minimal else 3


def cmd_fingerprint(args) -> int:
    problem = load_problem(args.file)
    fp = fingerprint(Bracket(problem.tensor), problem.metric, problem.structure)
    payload = _header()
    payload.update({
        "dim": fp.dim,
        "eigen_ric": fp.eigen_ric,
        "eigen_ric_gamma": fp.eigen_ric_gamma,
        "scal": fp.scal,
        "lcs_dims": fp.lcs_dims,
    })
    _emit(payload)
    return 0


def cmd_distinguish(args) -> int:
    pa = load_problem(args.file_a)
    pb = load_problem(args.file_b)
    fa = fingerprint(Bracket(pa.tensor), pa.metric, pa.structure)
    fb = fingerprint(Bracket(pb.tensor), pb.metric, pb.structure)
    verdict = distinguish(fa, fb, tol=args.tol)
    payload = _header()
    payload.update({
        "verdict": verdict,
        "tolerance": args.tol,
        "fingerprint_a": fa,
        "fingerprint_b": fb,
    })
    _emit(payload)
    return 0 if verdict == "Distinct" else 3


def cmd_catalog(args) -> int:
    if args.action == "list":
        payload = _header()
        payload["catalog"] = catalog_list()
        _emit(payload)
        return 0
    params = {}
    for item in args.params:
        if "=" not in item:
            print(f"error: catalog parameter {item!r} is not key=value",
                  file=sys.stderr)
            return 2
        key, _, value = item.partition("=")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            print(f"error: catalog parameter {item!r} has a non-numeric value",
                  file=sys.stderr)
            return 2
    try:
        point = catalog_get(args.id, params)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    problem = point_to_problem(point)
    text = json.dumps(jsonable(problem), indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        summary = _header()
        summary.update({"written": args.out, "family_id": point.family_id,
                        "params": point.params,
                        "validation": point.validation})
        _emit(summary)
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nilmetric",
        description="curvature, certification, flows and search for "
                    "left-invariant metrics on nilpotent groups",
    )
    parser.add_argument("--version", action="version",
                        version=f"nilmetric {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a problem file")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("curvature", help="curvature report as JSON")
    p.add_argument("file")
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("certify", help="minimality certificate as JSON")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=None,
                   help="certification tolerance (default from options/env)")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("flow", help="integrate the invariant Ricci flow")
    p.add_argument("file")
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--sign", choices=["plus", "minus"], default="minus")
    p.add_argument("--unnormalized", action="store_true",
                   help="drop the scalar-curvature-preserving trace term")
    p.add_argument("--integrator", choices=["rk4", "euler"], default="rk4")
    p.add_argument("--csv", default=None, metavar="PATH",
                   help="write the (t, scal, F, cert_residual) trace as CSV")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("search", help="multi-start descent to a minimal bracket")
    p.add_argument("file")
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturbation", type=float, default=0.2,
                   help="size of the random structure-group perturbations")
    p.add_argument("--tol-converge", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("fingerprint", help="spectral fingerprint as JSON")
    p.add_argument("file")
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("distinguish", help="compare two fingerprints")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_distinguish)

    p = sub.add_parser("catalog", help="list presets or export one")
    p.add_argument("action", choices=["list", "get"])
    p.add_argument("id", nargs="?", default=None)
    p.add_argument("params", nargs="*", default=[],
                   help="key=value overrides for the preset parameters")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="write the problem JSON to a file instead of stdout")
    p.set_defaults(func=cmd_catalog)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "catalog" and args.action == "get" and args.id is None:
        print("error: catalog get needs a preset id", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NilmetricError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
