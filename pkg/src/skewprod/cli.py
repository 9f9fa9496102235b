"""Command-line front door: load graphs/groups/groupoids from JSON, run the
constructions and certifications, and emit reports.

Exit codes: 0 when every check passes, 1 on a certification failure, 2 on an
input or parse error.  With --json the report body is deterministic for a
fixed seed and inputs (the wall_time_s field is excluded from that guarantee).
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import duality, graphalg, graphs, groupoids, groups, matalg, suite

DEFAULT_TOL = 1e-9
DEFAULT_MAX_DIM = 256


class InputError(Exception):
    pass


def _load(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err}") from err


def _load_group(path: str) -> groups.FiniteGroup:
    try:
        return groups.FiniteGroup.from_json(_load(path))
    except (KeyError, ValueError) as err:
        raise InputError(f"bad group file {path}: {err}") from err


def _load_graph(path: str, G: groups.FiniteGroup | None):
    text = _load(path)
    try:
        if G is None:
            return graphs.DirectedGraph.from_json(text), None
        return graphs.labeled_graph_from_json(text, G)
    except (KeyError, ValueError) as err:
        raise InputError(f"bad graph file {path}: {err}") from err


def _load_groupoid(path: str, G: groups.FiniteGroup | None):
    text = _load(path)
    try:
        Q, cocycle_map = groupoids.groupoid_from_json(text)
        c = None
        if G is not None:
            if cocycle_map is None:
                raise InputError(f"groupoid file {path} carries no cocycle")
            c = groupoids.cocycle_from_names(Q, G, cocycle_map)
        return Q, c
    except (KeyError, ValueError) as err:
        raise InputError(f"bad groupoid file {path}: {err}") from err


def _emit(args, report: dict, passed: bool, t0: float) -> int:
    report = dict(report)
    report["passed"] = bool(passed)
    report["wall_time_s"] = round(time.perf_counter() - t0, 6)
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True, default=_json_default))
    else:
        _human_summary(report)
    return 0 if passed else 1


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialize {type(x)}")


def _human_summary(report: dict, indent: str = ""):
    for key, value in report.items():
        if isinstance(value, dict):
            print(f"{indent}{key}:")
            _human_summary(value, indent + "  ")
        else:
            print(f"{indent}{key}: {value}")


def main(argv=None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cases", type=int, default=20)
    common.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    common.add_argument("--json", action="store_true", help="emit a JSON report")

    parser = argparse.ArgumentParser(
        prog="skewprod",
        description="Verification workbench for skew-product graph and "
        "groupoid C*-algebras at desk scale.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    graph_p = sub.add_parser("graph", help="graph constructions")
    graph_sub = graph_p.add_subparsers(dest="subcommand", required=True)
    for name in ("skew", "quotient", "gross-tucker"):
        p = graph_sub.add_parser(name, parents=[common])
        p.add_argument("-g", "--graph", required=True)
        p.add_argument("-G", "--group", required=True)

    algebra_p = sub.add_parser("algebra", help="graph algebra constructions")
    algebra_sub = algebra_p.add_subparsers(dest="subcommand", required=True)
    ck_p = algebra_sub.add_parser("ck", parents=[common])
    ck_p.add_argument("-g", "--graph", required=True)

    gpd_p = sub.add_parser("gpd", help="groupoid constructions")
    gpd_sub = gpd_p.add_subparsers(dest="subcommand", required=True)
    for name in ("skew", "semidirect"):
        p = gpd_sub.add_parser(name, parents=[common])
        p.add_argument("-q", "--groupoid", required=True)
        p.add_argument("-G", "--group", required=True)

    verify_p = sub.add_parser("verify", help="certify an isomorphism or bimodule")
    verify_sub = verify_p.add_subparsers(dest="subcommand", required=True)
    for name in ("eqvt-iso", "direct-iso", "free-action", "diagram"):
        p = verify_sub.add_parser(name, parents=[common])
        p.add_argument("-g", "--graph", required=True)
        p.add_argument("-G", "--group", required=True)
    for name in ("gpd-iso", "semi-cross", "equivalence", "bimodule"):
        p = verify_sub.add_parser(name, parents=[common])
        p.add_argument("-q", "--groupoid", required=True)
        p.add_argument("-G", "--group", required=True)
        if name == "equivalence":
            p.add_argument(
                "--kind", choices=("semidirect", "subgroupoid", "both"), default="both"
            )

    suite_p = sub.add_parser("suite", help="randomized certification suites")
    suite_sub = suite_p.add_subparsers(dest="subcommand", required=True)
    run_p = suite_sub.add_parser("run", parents=[common])
    run_p.add_argument(
        "--kinds",
        default="graph,free-action,groupoid",
        help="comma-separated case kinds",
    )

    convert_p = sub.add_parser(
        "convert",
        parents=[common],
        help="translate a labeled graph into another skew-product convention",
    )
    convert_p.add_argument("-g", "--graph", required=True)
    convert_p.add_argument("-G", "--group", required=True)
    convert_p.add_argument(
        "--to", choices=("group-first", "range-twisted"), default="range-twisted"
    )

    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        return _dispatch(args, t0)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (
        graphs.GraphError,
        groups.GroupError,
        groupoids.GroupoidError,
        matalg.DimensionMismatch,
        matalg.NotInSpan,
    ) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except duality.CertificationFailed as err:
        print(f"certification failed: {err}", file=sys.stderr)
        return 1


def _graph_to_obj(g: graphs.DirectedGraph) -> dict:
    return json.loads(g.to_json())


def _dispatch(args, t0) -> int:
    if args.command == "graph":
        G = _load_group(args.group)
        graph, labeling = _load_graph(args.graph, G)
        if args.subcommand == "skew":
            skew = graphs.skew_product(graph, G, labeling)
            return _emit(args, {"skew_product": _graph_to_obj(skew)}, True, t0)
        # quotient and gross-tucker act on a skew-product-shaped graph via
        # the right-translation action.
        action = graphs.translation_action(graph, G)
        quotient, qlab, iso = graphs.quotient_and_gross_tucker(graph, action)
        report = {
            "quotient": _graph_to_obj(quotient),
            "labels": {
                str(e.id): G.name(qlab.of(i)) for i, e in enumerate(quotient.edges)
            },
        }
        if args.subcommand == "gross-tucker":
            report["vertex_map"] = {str(k): list(v) for k, v in iso.vertex_map.items()}
            report["edge_map"] = {str(k): list(v) for k, v in iso.edge_map.items()}
        return _emit(args, report, True, t0)

    if args.command == "algebra" and args.subcommand == "ck":
        graph, _ = _load_graph(args.graph, None)
        fam = graphalg.ck_representation(graph)
        closure = matalg.span_closure(list(fam.s) + list(fam.p))
        blocks = fam.sink_block_sizes()
        report = {
            "ambient_dim": fam.ambient_dim,
            "dim": fam.dim,
            "generated_dim": closure.dim,
            "sink_blocks": {str(graph.vertices[w]): n for w, n in blocks.items()},
            "signature": list(matalg.wedderburn_signature(fam.span)),
        }
        return _emit(args, report, closure.dim == fam.dim, t0)

    if args.command == "gpd":
        G = _load_group(args.group)
        Q, c = _load_groupoid(args.groupoid, G)
        skew = groupoids.skew_product_groupoid(Q, G, c)
        if args.subcommand == "skew":
            return _emit(args, {"skew_product": json.loads(skew.to_json())}, True, t0)
        trans = groupoids.translation_groupoid_action(skew, G)
        semi = groupoids.semidirect_product(skew, G, trans)
        return _emit(args, {"semidirect": json.loads(semi.to_json())}, True, t0)

    if args.command == "verify":
        return _dispatch_verify(args, t0)

    if args.command == "suite" and args.subcommand == "run":
        kinds = tuple(k.strip() for k in args.kinds.split(",") if k.strip())
        report = suite.suite_run(
            seed=args.seed,
            cases=args.cases,
            tol=max(args.tol, 1e-9),
            max_dim=args.max_dim,
            kinds=kinds,
        )
        body = report.as_dict()
        if not args.json:
            lines = [
                f"case {c.index} [{c.kind}] seed={c.seed} "
                f"{'pass' if c.passed else 'FAIL'} ({c.wall_time_s:.2f}s)"
                for c in report.cases
            ]
            print("\n".join(lines))
            print(f"{sum(c.passed for c in report.cases)}/{len(report.cases)} pass")
            return 0 if report.passed else 1
        return _emit(args, body, report.passed, t0)

    if args.command == "convert":
        G = _load_group(args.group)
        graph, labeling = _load_graph(args.graph, G)
        other, iso = graphs.convention_iso(graph, G, labeling, which=args.to)
        report = {
            "convention": args.to,
            "graph": _graph_to_obj(other),
            "vertex_map": {str(k): list(v) for k, v in iso.vertex_map.items()},
            "edge_map": {str(k): list(v) for k, v in iso.edge_map.items()},
        }
        return _emit(args, report, True, t0)

    raise InputError(f"unknown command {args.command}")


def _dispatch_verify(args, t0) -> int:
    tol = args.tol
    if args.subcommand in ("eqvt-iso", "direct-iso", "free-action", "diagram"):
        G = _load_group(args.group)
        graph, labeling = _load_graph(args.graph, G)
        if args.subcommand == "eqvt-iso":
            cert = duality.certify_eqvt_iso(graph, G, labeling, tol=tol)
        elif args.subcommand == "direct-iso":
            cert = duality.certify_direct_iso(
                graph, G, labeling, tol=tol, rng=np.random.default_rng(args.seed)
            )
        elif args.subcommand == "diagram":
            cert = duality.certify_regular_diagram(graph, G, labeling, tol=tol)
        else:
            action = graphs.translation_action(graph, G)
            cert = duality.certify_free_action(
                graph, action, tol=tol, rng=np.random.default_rng(args.seed)
            )
        return _emit(args, {"certificate": cert.as_dict(), "seed": args.seed}, cert.passed, t0)

    G = _load_group(args.group)
    Q, c = _load_groupoid(args.groupoid, G)
    rng = np.random.default_rng(args.seed)
    if args.subcommand == "gpd-iso":
        cert = groupoids.certify_gpd_iso(Q, G, c, tol=tol)
        return _emit(args, {"certificate": cert.as_dict(), "seed": args.seed}, cert.passed, t0)
    if args.subcommand == "semi-cross":
        skew = groupoids.skew_product_groupoid(Q, G, c)
        trans = groupoids.translation_groupoid_action(skew, G)
        cert = groupoids.certify_semi_cross(skew, G, trans, tol=tol, rng=rng)
        return _emit(args, {"certificate": cert.as_dict(), "seed": args.seed}, cert.passed, t0)
    if args.subcommand == "equivalence":
        kinds = ("semidirect", "subgroupoid") if args.kind == "both" else (args.kind,)
        report = {}
        passed = True
        for kind in kinds:
            _, rep = groupoids.certify_equivalence(kind, Q, G, c, rng=rng)
            report[kind] = rep
            passed = passed and all(v for k, v in rep.items() if k.endswith("_ok"))
        return _emit(args, {"equivalence": report, "seed": args.seed}, passed, t0)
    if args.subcommand == "bimodule":
        evaluator = groupoids.InnerProductEvaluator(Q, c)
        err = 0.0
        for k in range(args.cases):
            a = rng.standard_normal(Q.n_arrows) + 1j * rng.standard_normal(Q.n_arrows)
            b = rng.standard_normal(Q.n_arrows) + 1j * rng.standard_normal(Q.n_arrows)
            _, rep = evaluator(a, b, tol=max(tol, 1e-9), all_y=(k < 3))
            err = max(err, rep["formula_agreement_error"])
        module_rep = groupoids.verify_bimodule_module_structure(
            Q, c, tol=max(tol, 1e-9), n_random=args.cases, rng=rng
        )
        passed = err <= max(tol, 1e-9) and all(
            v for k, v in module_rep.items() if k.endswith("_ok")
        )
        report = {
            "inner_product_max_error": err,
            "module_structure": module_rep,
            "seed": args.seed,
            "pairs": args.cases,
        }
        return _emit(args, report, passed, t0)
    raise InputError(f"unknown verify subcommand {args.subcommand}")


if __name__ == "__main__":
    sys.exit(main())
