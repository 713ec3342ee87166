"""Command line interface.

    lve check FILE            parse, typecheck, report type and mass
    lve denote FILE           joint distribution over the output web
    lve facts FILE            the factor multiset of the term
    lve vef FILE              classical variable elimination on the factors
    lve vel FILE              variable elimination by term rewriting
    lve compare FILE          both routes side by side; exit 1 on mismatch
    lve cost FILE             operation counts of the classical route
    lve orderings FILE        an elimination order from a heuristic

FILE ending in .json is read as a Bayesian network, anything else as program
text. Exit status: 0 on success, 1 when a verification fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys

from .cost import DEFAULT_WEB_CAP
from .denote import DenoteContext, collect_matrices, denote, joint_vector, total_mass_check
from .errors import LveError, NotClosed, UnknownVariable
from .factors import dump_factors, eliminate, factors_of, marginal, relation_from_factors
from .network import load_network
from .orderings import min_degree_order, random_order
from .parser import SourceProgram, parse_program
from .printer import program_str
from .rewrite import RewriteStep, eliminate_seq, simplify
from .syntax import (
    LetTerm,
    Variable,
    free_vars,
    pattern_type,
    pattern_vars,
    type_str,
    typecheck,
)
from .webs import enumerate_web


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _load(path: str, check_stochastic: bool) -> SourceProgram:
    if path.endswith(".json"):
        program = load_network(path)
    else:
        with open(path) as fh:
            program = parse_program(fh.read())
    typecheck(program.term)
    if check_stochastic:
        bad = [m.name for m in collect_matrices(program.term) if not m.stochastic]
        if bad:
            raise LveError(
                f"matrices with rows not summing to one: {', '.join(bad)}"
                " (pass --no-stochastic-check to allow)"
            )
    return program


def _parse_order(term: LetTerm, names: str | None, ctx: DenoteContext) -> list[Variable]:
    if names is None:
        return min_degree_order(term, ctx)
    by_name = {v.name: v for v in term.defined_vars()}
    order = []
    for name in names.split(","):
        name = name.strip()
        if name not in by_name:
            raise UnknownVariable(f"--order names {name!r}, which is not defined in the term")
        order.append(by_name[name])
    return order


def _print_marginal(term: LetTerm, values) -> None:
    for elem, v in zip(enumerate_web(pattern_type(term.output)), values):
        print(f"{elem}: {_fmt(v)}")


def _step_str(s: RewriteStep) -> str:
    if s.var is not None:
        return f"{s.rule}[{s.var.name}]@{s.position}"
    return f"{s.rule}@{s.position}"


def main(argv: list[str] | None = None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="program text or a .json network")
    common.add_argument("--web-cap", type=int, default=DEFAULT_WEB_CAP, help="largest web to materialize")
    common.add_argument(
        "--no-stochastic-check",
        action="store_true",
        help="accept matrices whose rows do not sum to one",
    )
    common.add_argument("--seed", type=int, default=0, help="seed for the random heuristic")

    top = argparse.ArgumentParser(prog="lve", description=__doc__.split("\n\n")[0])
    sub = top.add_subparsers(dest="command", required=True)

    sub.add_parser("check", parents=[common])
    p = sub.add_parser("denote", parents=[common])
    p.add_argument("--json", action="store_true")
    sub.add_parser("facts", parents=[common])
    p = sub.add_parser("vef", parents=[common])
    p.add_argument("--order", help="comma separated variables; min-degree when omitted")
    p = sub.add_parser("vel", parents=[common])
    p.add_argument("--order")
    p.add_argument("--emit-term", action="store_true", help="print the rewritten program")
    p.add_argument("--trace", action="store_true", help="print every rule application")
    p.add_argument("--simplify", action="store_true", help="clean up administrative lets first")
    p = sub.add_parser("compare", parents=[common])
    p.add_argument("--order")
    p.add_argument("--json", action="store_true")
    p = sub.add_parser("cost", parents=[common])
    p.add_argument("--order")
    p = sub.add_parser("orderings", parents=[common])
    p.add_argument("--heuristic", choices=("min-degree", "random"), default="min-degree")

    args = top.parse_args(argv)
    try:
        return _dispatch(args)
    except LveError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace) -> int:
    program = _load(args.file, not args.no_stochastic_check)
    term = program.term
    ctx = DenoteContext(web_cap=args.web_cap)

    if args.command == "check":
        ty = typecheck(term)
        print(f"type: {type_str(ty)}")
        fv = sorted(v.name for v in free_vars(term))
        if fv:
            print(f"free: {' '.join(fv)}")
        used = collect_matrices(term)
        flat = sum(1 for m in used if m.stochastic)
        print(f"matrices: {len(used)} ({flat} stochastic)")
        if not fv and all(m.stochastic for m in used):
            mass = total_mass_check(term, ctx)
            print(f"mass: {_fmt(mass.mass)} expected {mass.expected}")
            if not mass.ok:
                print("mass check failed")
                return 1
        print("ok")
        return 0

    if args.command == "denote":
        rel = denote(term, ctx)
        values = joint_vector(rel)
        out_names = [v.name for v in pattern_vars(term.output)]
        if args.json:
            payload = {
                "output": out_names,
                "type": type_str(rel.ty),
                "web": [str(e) for e in enumerate_web(rel.ty)],
                "values": [float(v) for v in values],
            }
            print(json.dumps(payload))
        else:
            print(f"output: {' '.join(out_names)}")
            for elem, v in zip(enumerate_web(rel.ty), values):
                print(f"{elem}: {_fmt(v)}")
        return 0

    if args.command == "facts":
        print(dump_factors(factors_of(term, ctx)))
        return 0

    if args.command == "orderings":
        if args.heuristic == "min-degree":
            order = min_degree_order(term, ctx)
        else:
            order = random_order(term, args.seed)
        print(",".join(v.name for v in order))
        return 0

    order = _parse_order(term, args.order, ctx)
    if not (args.command == "compare" and args.json):
        quiet = args.command == "vel" and args.emit_term
        print(f"order: {','.join(v.name for v in order)}", file=sys.stderr if quiet else sys.stdout)

    if args.command in ("vef", "cost"):
        fs = eliminate(factors_of(term, ctx), order, args.web_cap)
        if args.command == "vef":
            print(dump_factors(fs))
        print(f"muladds: {fs.counter.muladds}")
        print(f"max_table: {fs.counter.max_table}")
        return 0

    if args.command == "vel":
        final, trace = eliminate_seq(term, order)
        if args.simplify:
            final = simplify(final)
        status = sys.stderr if args.emit_term else sys.stdout
        print(f"steps: {len(trace.steps)}", file=status)
        if args.trace:
            for s in trace.steps:
                print(_step_str(s), file=status)
        if args.emit_term:
            print(program_str(final))
        else:
            _print_marginal(term, marginal(factors_of(final, ctx), term.output, args.web_cap))
        return 0

    assert args.command == "compare"
    if free_vars(term):
        raise NotClosed("compare needs a closed program")
    cap = args.web_cap

    ctx_d = DenoteContext(web_cap=cap)
    val_d = joint_vector(denote(term, ctx_d))

    ctx_f = DenoteContext(web_cap=cap)
    val_f = joint_vector(relation_from_factors(term, ctx_f))

    ctx_e = DenoteContext(web_cap=cap)
    fs = eliminate(factors_of(term, ctx_e), order, cap)
    vef_muladds, vef_max = fs.counter.muladds, fs.counter.max_table
    val_e = marginal(fs, term.output, cap)

    final, trace = eliminate_seq(term, order)
    ctx_l = DenoteContext(web_cap=cap)
    fs_l = factors_of(final, ctx_l)
    val_l = marginal(fs_l, term.output, cap)

    diff = 0.0
    for row in zip(val_d, val_f, val_e, val_l):
        xs = [float(x) for x in row]
        diff = max(diff, max(xs) - min(xs))
    agree = diff <= 1e-9

    paths = [
        ("denote", val_d, ctx_d.counter.muladds, ctx_d.counter.max_table),
        ("facts", val_f, ctx_f.counter.muladds, ctx_f.counter.max_table),
        ("vef", val_e, vef_muladds, vef_max),
        ("vel", val_l, fs_l.counter.muladds, fs_l.counter.max_table),
    ]
    if args.json:
        payload: dict = {
            "order": [v.name for v in order],
            "output": [v.name for v in pattern_vars(term.output)],
            "web": [str(e) for e in enumerate_web(pattern_type(term.output))],
        }
        for name, values, muladds, max_table in paths:
            payload[name] = {
                "values": [float(v) for v in values],
                "muladds": muladds,
                "max_table": max_table,
            }
        payload["vel"]["steps"] = len(trace.steps)
        payload["max_diff"] = diff
        payload["agree"] = agree
        print(json.dumps(payload))
    else:
        for name, values, _, _ in paths:
            print(f"{name}:")
            _print_marginal(term, values)
        for name, _, muladds, max_table in paths:
            extra = f" steps={len(trace.steps)}" if name == "vel" else ""
            print(f"{name} cost: muladds={muladds} max_table={max_table}{extra}")
        print(f"max_diff: {diff:.3g}")
        print(f"agree: {'yes' if agree else 'no'}")
    return 0 if agree else 1


if __name__ == "__main__":
    sys.exit(main())
