"""Command-line interface.

Exit status: 0 on success, 1 when a verification fails, 2 on bad input.
Errors are reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .algebra import AlgebraError
from .chart import monomials_up_to
from .coeffs import (
    METHODS,
    CoefficientError,
    CoefficientTable,
    coeff_1d_table,
    compute_table,
    cpn_closed_table,
    cpn_recurrence,
    solve_general,
    verify_residual,
)
from .geometry import GeometryError, geometry_from_json, parse_manifold
from .linsolve import LinearSystemError
from .parser import ParseError, parse_function
from .star import AssociativityChecker, StarEngine, StarError, check_poisson, check_unit


class InputError(Exception):
    pass


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _manifold(name: str):
    if name.startswith("custom:"):
        path = name[len("custom:"):]
        try:
            return geometry_from_json(_read_json(path))
        except (KeyError, TypeError, AttributeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, INPUT_ERRORS):
                raise
            raise InputError(f"{path} is not a geometry: {exc!r}") from exc
    return parse_manifold(name)


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _load_table(path: str) -> CoefficientTable:
    try:
        return CoefficientTable.from_json(_read_json(path))
    except (KeyError, TypeError, AttributeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, INPUT_ERRORS):
            raise
        raise InputError(f"{path} is not a coefficient table: {exc!r}") from exc


def cmd_coeffs(args) -> int:
    if args.order < 0:
        raise InputError("--order must be non-negative")
    geom = _manifold(args.manifold)
    table = compute_table(geom, args.order, args.method)
    _write(table.dumps(), args.out)
    if args.csv:
        Path(args.csv).write_text(table.series_csv(args.hbar_order))
    return 0


def cmd_star(args) -> int:
    geom = parse_manifold(args.manifold)
    if geom.kind != "cpn":
        raise InputError("star products are available on cpn:N only")
    f = parse_function(args.f, geom.N)
    g = parse_function(args.g, geom.N)
    table = cpn_closed_table(geom.N, args.order)
    result = StarEngine(table).star(f, g, args.order)
    out = {"f": args.f, "g": args.g, "order": args.order, "text": str(result.value)}
    out.update(result.to_json())
    _write(_dump(out), args.out)
    return 0


def _triangulate(table: CoefficientTable) -> dict:
    geom = table.geometry
    K = table.max_order
    others = {"general": solve_general(geom, K)}
    if table.manifold.get("kind") == "cpn":
        others["closed"] = cpn_closed_table(geom.N, K)
        others["recurrence"] = cpn_recurrence(geom.N, K)
    elif table.manifold.get("kind") == "one_dim":
        others["closed"] = coeff_1d_table(geom.metric[0][0], geom.curvature[0][0][0][0], K)
    out = {}
    for name, other in others.items():
        diff = table.diff(other)
        out[name] = {"passed": not diff, "mismatches": [{"n": n, "alpha": list(a), "beta": list(b)} for n, a, b in diff]}
    return out


def _axioms(table: CoefficientTable, K: int) -> dict:
    if table.manifold.get("kind") != "cpn":
        raise InputError("axiom checks need a cpn table")
    if not 0 <= K <= table.max_order:
        raise InputError(f"--order must lie in 0..{table.max_order}")
    eng = StarEngine(table)
    N = table.N
    pool = monomials_up_to(N, 2)
    unit = [check_unit(f, table, K, engine=eng) for f in pool]
    poisson = [check_poisson(f, g, table, engine=eng) for f in pool for g in pool] if K >= 1 else []
    checker = AssociativityChecker(eng, pool, K)
    n = len(pool)
    assoc_fail = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                v = checker.check(i, j, k)
                if v is not None:
                    assoc_fail.append({"f": str(pool[i]), "g": str(pool[j]), "h": str(pool[k]), "hbar_order": v})
    return {
        "unit": {"passed": all(r.passed for r in unit), "failures": [x for r in unit for x in r.failures]},
        "poisson": {"passed": all(r.passed for r in poisson), "failures": [x for r in poisson for x in r.failures]},
        "associativity": {"passed": not assoc_fail, "checked": n ** 3, "failures": assoc_fail},
    }


def cmd_verify(args) -> int:
    table = _load_table(args.table)
    report: dict = {}
    ok = True
    if args.residuals or not (args.axioms or args.triangulate):
        res = [verify_residual(table, table.geometry, n) for n in range(table.max_order + 1)]
        report["residuals"] = [r.to_json() for r in res]
        ok &= all(r.passed for r in res)
    if args.triangulate:
        tri = _triangulate(table)
        report["triangulate"] = tri
        ok &= all(v["passed"] for v in tri.values())
    if args.axioms:
        K = args.order if args.order is not None else min(table.max_order, 2)
        ax = _axioms(table, K)
        report["axioms"] = ax
        ok &= all(v["passed"] for v in ax.values())
    report["passed"] = bool(ok)
    _write(_dump(report), args.out)
    return 0 if ok else 1


def cmd_expand(args) -> int:
    if args.hbar_order < 0:
        raise InputError("--hbar-order must be non-negative")
    table = _load_table(args.table)
    _write(table.series_csv(args.hbar_order), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kahlerstar", description="Exact star-product coefficients on locally symmetric Kähler manifolds.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coeffs", help="compute a coefficient table")
    c.add_argument("--manifold", required=True, help="cpn:N | grassmann:p,q | g22 | onedim:g,R | custom:FILE")
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--method", choices=METHODS)
    c.add_argument("--out")
    c.add_argument("--csv")
    c.add_argument("--hbar-order", type=int, default=4)
    c.set_defaults(func=cmd_coeffs)

    s = sub.add_parser("star", help="evaluate a truncated star product on a CP^N chart")
    s.add_argument("--manifold", required=True)
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--f", required=True)
    s.add_argument("--g", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_star)

    v = sub.add_parser("verify", help="check a table")
    v.add_argument("--table", required=True)
    v.add_argument("--residuals", action="store_true")
    v.add_argument("--axioms", action="store_true")
    v.add_argument("--order", type=int)
    v.add_argument("--triangulate", action="store_true")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("expand", help="hbar-series of every table entry as CSV")
    e.add_argument("--table", required=True)
    e.add_argument("--hbar-order", type=int, required=True)
    e.add_argument("--out")
    e.set_defaults(func=cmd_expand)
    return p


INPUT_ERRORS = (InputError, GeometryError, CoefficientError, ParseError, StarError, LinearSystemError, AlgebraError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            sys.stderr.write(json.dumps({"error": "usage", "message": "invalid command line"}) + "\n")
            return 2
        return 0
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
