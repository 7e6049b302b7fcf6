"""Command line: ``fdbounds {bound,synth,eval,verify}``.

Exit codes: 0 ok, 1 verification failed, 2 bad input, 3 size cap exceeded,
4 invalid construction input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import bounds
from .constants import LATTICE_CAP, ROW_LIMIT
from .core import CapExceeded, InstanceError, Query, effective_fds, violated_fds
from .entropy import uniform_on_table
from .evaluator import EvalStats, evaluate, project_bag_count, project_set
from .formats import InstanceSpec, database_to_text, parse_database, parse_instance, parse_params
from .synth import (
    Coloring,
    ConstructionError,
    GroupConstructionSpec,
    VectorSpaceSystem,
    coloring_database,
    coloring_from_weights,
    coloring_sizes,
    coloring_to_vector_space,
    dualize_coloring,
    gc_ratio,
    permutation_database,
    permutation_sizes,
    product_database,
    product_ratio,
    product_sizes,
    vs_sizes,
    vs_system_database,
)
from .verify import default_product_n, fmt, verify_instance

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_CAP, EXIT_CONSTRUCTION = 0, 1, 2, 3, 4


def _emit(args, record: dict, lines: list) -> None:
    if args.json:
        print(json.dumps(record, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


# ---------------------------------------------------------------------------
# bound


def cmd_bound(args) -> int:
    spec = parse_instance(args.instance)
    s, f, q = spec.schema, spec.fds, spec.query
    if args.method == "agm":
        report = bounds.edge_cover_bound(s, q)
    elif args.method == "packing":
        report = bounds.vertex_packing_bound(s, q)
    elif args.method == "polymatroid":
        report = bounds.polymatroid_bound(s, f, q, spec.budgets, cap=args.cap)
    else:
        if not q.is_natural_join(s):
            raise InstanceError("the coloring bound needs a query without projection")
        report = bounds.coloring_bound(s, f, q, cap=args.cap)
    record = report.to_record()
    record["decimal"] = f"{float(report.value):.6f}"
    lines = [f"method: {report.method}", f"value: {fmt(report.value)}", "certificate:"]
    lines += [f"  {k}: {v}" for k, v in sorted(report.certificate.items())]
    _emit(args, record, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth


def _coloring(params: dict, spec: InstanceSpec) -> Coloring:
    if "coloring" in params:
        return Coloring({x: frozenset(c) for x, c in params["coloring"].items()})
    q = Query(spec.query.joins)
    return coloring_from_weights(bounds.coloring_bound(spec.schema, spec.fds, q).certificate)


def _build(args, spec: InstanceSpec, params: dict):
    """(setting, sizes, predicted ratio, database thunk) for the chosen construction."""
    s, f = spec.schema, spec.fds
    q = Query(spec.query.joins)
    limit = args.row_limit
    name = args.construction
    if name == "product":
        packing = params.get("packing") or bounds.vertex_packing_bound(s, q).certificate
        N = args.N or params.get("N") or default_product_n(packing)
        return (f"N={N}", product_sizes(s, q, packing, N), product_ratio(s, q, packing),
                lambda: product_database(s, q, packing, N, limit, f))
    if name == "coloring":
        col = _coloring(params, spec)
        values = args.N or params.get("values", 2)
        n = values if isinstance(values, int) else len(values)
        return (f"|N|={n}", coloring_sizes(s, q, col, n), col.ratio(s, q),
                lambda: coloring_database(s, q, col, f, values, limit))
    if name == "vspace":
        if "subspaces" in params:
            if "dim" not in params:
                raise InstanceError("vector space parameters need 'dim'")
            system = VectorSpaceSystem(args.prime or params.get("prime", 2), params["dim"], params["subspaces"])
        else:
            system = dualize_coloring(coloring_to_vector_space(_coloring(params, spec), args.prime or params.get("prime", 2)))
        return (f"GF({system.prime})^{system.dim}", vs_sizes(s, q, system), system.ratio(s, q),
                lambda: vs_system_database(s, q, system, f, limit))
    base = params.get("base")
    if base is None:
        col = _coloring(params, spec)
        base = uniform_on_table(evaluate(s, f, q, coloring_database(s, q, col, f, 2, limit), "baseline"))
    k = args.k or params.get("k") or base.common_denominator
    gspec = GroupConstructionSpec(base, k)
    return (f"k={k}", permutation_sizes(s, q, gspec), gc_ratio(s, q, gspec),
            lambda: permutation_database(s, q, gspec, f, limit))


def cmd_synth(args) -> int:
    spec = parse_instance(args.instance)
    params = parse_params(args.params) if args.params else {}
    setting, sizes, predicted, build = _build(args, spec, params)
    record = {
        "construction": args.construction,
        "setting": setting,
        "sizes": {k: str(v) for k, v in sizes.items()},
        "predicted_alpha": None if predicted is None else str(predicted),
    }
    lines = [f"construction: {args.construction} [{setting}]", "closed-form sizes:"]
    lines += [f"  {k}: {v}" for k, v in sizes.items()]
    lines.append(f"predicted alpha: {fmt(predicted)}")
    if not args.count_only:
        db = build()
        Path(args.out).write_text(database_to_text(db), encoding="utf-8")
        record["out"] = args.out
        lines.append(f"wrote {args.out}")
    _emit(args, record, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval


def cmd_eval(args) -> int:
    spec = parse_instance(args.instance)
    s, f, q = spec.schema, spec.fds, spec.query
    db = parse_database(args.database, s)
    bad = violated_fds(db, effective_fds(s, f, q.joins))
    if bad:
        raise InstanceError("database violates " + ", ".join(map(str, bad)))
    stats = EvalStats()
    start = time.perf_counter()
    full = evaluate(s, f, q, db, args.algo, stats)
    elapsed = time.perf_counter() - start
    free = q.free_variables(s)
    if args.free_projection == "bag":
        _, count = project_bag_count(full, free)
        shown = full
    else:
        shown = project_set(full, free)
        count = len(shown)
    d = db.size_over(q.joins)
    alpha = math.log2(count) / math.log2(d) if count and d > 1 else None
    record = {
        "algo": args.algo,
        "projection": args.free_projection,
        "rows": count,
        "join_rows": len(full),
        "database_size": d,
        "alpha": alpha,
    }
    lines = [
        f"rows: {count}",
        f"join rows: {len(full)}",
        f"database size: {d}",
        "alpha: " + (f"{alpha:.6f}" if alpha is not None else "undefined (empty result or |D| <= 1)"),
    ]
    logging.getLogger("fdbounds").info("evaluation took %.6f s", elapsed)
    if args.algo == "components":
        record["extensions"] = stats.extensions
        record["steps"] = stats.steps
        lines.append(f"extensions tried: {stats.extensions}")
        for st in stats.steps:
            lines.append(f"  component {','.join(st['component'])} span {','.join(st['span']) or '{}'}: "
                         f"{st['inputs']} x {st['candidates']} -> {st['outputs']}")
    if args.dump:
        rows = [list(r) for r in shown.project(free).sorted_rows()] if args.free_projection == "set" \
            else [list(r) for r in shown.sorted_rows()]
        record["attributes"] = sorted(free) if args.free_projection == "set" else list(shown.attributes)
        record["result"] = rows
        lines.append("result " + " ".join(record["attributes"]))
        lines += ["  " + " ".join(r) for r in rows]
    _emit(args, record, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    spec = parse_instance(args.instance)
    params = parse_params(args.params) if args.params else {}
    report = verify_instance(
        spec.schema,
        spec.fds,
        spec.query,
        n_values=args.N or 2,
        prime=args.prime or 2,
        k=args.k or params.get("k"),
        base=params.get("base"),
        algo=args.algo,
        row_limit=args.row_limit,
        cap=args.cap,
    )
    _emit(args, report.to_record(), report.lines())
    return EXIT_OK if report.passed else EXIT_VERIFY


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdbounds", description="Join size bounds under functional dependencies.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON record instead of text")
    common.add_argument("--cap", type=int, default=LATTICE_CAP, help="max query variables for lattice LPs")
    common.add_argument("--row-limit", type=int, default=ROW_LIMIT, help="max rows per synthesized table")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[common], help="compute a bound")
    p.add_argument("instance")
    p.add_argument("--method", choices=["agm", "packing", "polymatroid", "coloring"], default="polymatroid")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("synth", parents=[common], help="synthesize a worst-case database")
    p.add_argument("instance")
    p.add_argument("--construction", choices=["product", "coloring", "vspace", "permutation"], required=True)
    p.add_argument("--params", help="generator parameter file")
    p.add_argument("--N", type=int, help="product: domain scale; coloring: number of values")
    p.add_argument("--k", type=int, help="permutation: rows of the matrix")
    p.add_argument("--prime", type=int, help="vspace: field size")
    p.add_argument("--out", help="database file to write")
    p.add_argument("--count-only", action="store_true", help="print closed-form sizes only")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", parents=[common], help="evaluate the query on a database")
    p.add_argument("instance")
    p.add_argument("database")
    p.add_argument("--algo", choices=["baseline", "components"], default="components")
    p.add_argument("--free-projection", choices=["set", "bag"], default="set")
    p.add_argument("--dump", action="store_true", help="print the result rows")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", parents=[common], help="check constructions against the bounds")
    p.add_argument("instance")
    p.add_argument("--params", help="parameter file (base distribution and k for the permutation construction)")
    p.add_argument("--N", type=int, help="values per colour")
    p.add_argument("--k", type=int)
    p.add_argument("--prime", type=int)
    p.add_argument("--algo", choices=["baseline", "components"], default="components")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command == "synth" and not args.count_only and not args.out:
        parser.error("synth needs --out unless --count-only is given")
    try:
        return args.func(args)
    except ConstructionError as exc:
        print(f"error: invalid construction: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InstanceError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
