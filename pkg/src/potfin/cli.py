"""Command-line front end.

Exit codes: 0 when every law passes, 1 when some law fails, 2 on input
errors (including usage errors), 3 when an enumeration cap is hit.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

from .errors import InputError, ResourceError
from .funspace import check_apx_iso, continuity_report, named_fn
from .gallery import DEPTH_CAP, check_dyadic_ep
from .index import ProductIndex, TrivialIndex
from .limit import (TARGET_ANCHORS, BoolTarget, DyadicTarget, ElemTarget, NatTarget, check_target,
                    enumerate_dynamic_elements)
from .perset import BoolPer, DyadicPer, NatPer, check_convergence_bridge, check_extensionality, per_from_target
from .report import LawReport, Verdict
from .sysdef import resolve_system
from .system import LAW_ORDER, FactorSystem, check_laws, function_space

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3

DYADIC_LAWS = ("DYEP1", "DYEP2")
PER_SPACES = {"nat": NatPer, "bool": BoolPer, "dyadic": DyadicPer}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _stage_bound(system: FactorSystem, n: int | None):
    if isinstance(system.index, TrivialIndex):
        return "*"
    if n is None:
        if system.max_stage is None:
            raise InputError("--max-stage is required")
        return system.max_stage
    return system.index.validate(n)


def _target_for(system: FactorSystem, kind: str, bound):
    if kind == "nat":
        return NatTarget(system)
    if kind == "bool":
        return BoolTarget(system)
    if kind == "dyadic":
        return DyadicTarget(system)
    return ElemTarget(system, bound)


def _merge(into: LawReport, other: LawReport, prefix: str = "") -> LawReport:
    for r in other.results:
        if prefix:
            r.law = prefix + r.law
        into.results.append(r)
    for k, v in other.meta.items():
        into.meta.setdefault(k if not prefix else f"{prefix.lower()}{k}", v)
    return into


def _run_parts(parts: Sequence[Callable[[], LawReport]], jobs: int) -> list[LawReport]:
    """Run independent checks, in parallel when asked; results keep their input order."""
    if jobs <= 1 or len(parts) <= 1:
        return [p() for p in parts]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda p: p(), parts))


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> LawReport:
    system = resolve_system(args.system, args.max_stage)
    kind = args.system if args.system in PER_SPACES else "explicit"
    bound = _stage_bound(system, args.max_stage)
    wanted = None if args.laws == "all" else {x.strip().upper() for x in args.laws.split(",") if x.strip()}
    known = set(LAW_ORDER) | set(TARGET_ANCHORS) | (set(DYADIC_LAWS) if kind == "dyadic" else set())
    if wanted is not None and wanted - known:
        raise InputError(f"unknown law ids {sorted(wanted - known)}; known: {', '.join(sorted(known))}")

    parts = []
    sys_laws = "all" if wanted is None else [x for x in LAW_ORDER if x in wanted]
    if sys_laws:
        parts.append(lambda: check_laws(system, sys_laws, bound))
    if wanted is None or wanted & set(TARGET_ANCHORS):
        parts.append(lambda: check_target(_target_for(system, kind, bound), bound))
    if kind == "dyadic" and (wanted is None or wanted & set(DYADIC_LAWS)):
        parts.append(lambda: check_dyadic_ep(depth=max(10, bound) if bound <= DEPTH_CAP else DEPTH_CAP))

    rep = LawReport(system.name, system.index.fmt(bound))
    for part in _run_parts(parts, args.jobs):
        _merge(rep, part)
    if wanted is not None:
        rep.results = [r for r in rep.results if r.law in wanted]
    return rep


def cmd_limit(args) -> LawReport:
    system = resolve_system(args.system, args.max_stage)
    kind = args.system if args.system in PER_SPACES else "explicit"
    bound = _stage_bound(system, args.max_stage)
    elems = enumerate_dynamic_elements(system, bound)
    T = _target_for(system, kind, bound)
    rep = LawReport(f"limit of {system.name}", system.index.fmt(bound),
                    meta={"dynamic-elements": len(elems), "elements": [a.label for a in elems[:64]]})
    _merge(rep, check_target(T, bound))
    if T.has_emb and system.has_emb:
        _merge(rep, check_extensionality(per_from_target(T, bound), bound), prefix="EXTL-")
        _merge(rep, check_convergence_bridge(T, bound))
    return rep


def cmd_funspace(args) -> LawReport:
    A = resolve_system(args.dom, args.max_stage)
    B = resolve_system(args.cod, args.max_stage)
    F = function_space(A, B)
    bound = (_stage_bound(A, args.max_stage), _stage_bound(B, args.max_stage))
    rep = LawReport(F.name, F.index.fmt(bound), meta={"sizes": {F.index.fmt(ij): len(F.stage(ij))
                                                                  for ij in F.index.upto(bound)}})
    _merge(rep, check_laws(F, "all", bound))
    if args.verify_iso:
        if args.dom not in PER_SPACES or args.cod not in PER_SPACES:
            raise InputError(f"--verify-iso needs builtin carriers ({', '.join(sorted(PER_SPACES))})")
        M, N = PER_SPACES[args.dom](), PER_SPACES[args.cod]()
        iso = check_apx_iso(M, N, bound)
        _merge(rep, iso)
        rep.meta["certificate"] = iso.meta["certificate"]
    return rep


def cmd_continuity(args) -> LawReport:
    f = named_fn(args.fn)
    if args.max_i < 1 or args.max_j < 1:
        raise InputError("--max-i and --max-j must be >= 1")
    bound = ((args.max_i, "*"), "*") if args.fn == "forall" else (args.max_i, args.max_j)
    r = continuity_report(f, bound)
    return r.law_report(ProductIndex((f.dom.index, f.cod.index)))


def cmd_eval(args) -> LawReport:
    from .stlc import (NAT, Models, check_consistency, interpret, parse, reference_value, show,
                       show_value, typecheck)

    t = parse(args.term)
    ty = typecheck(t)
    models = Models(args.bound)
    v = interpret(t, args.stage, args.bound, models)
    rep = LawReport(f"{show(t)} : {ty}", args.stage,
                    meta={"type": str(ty), "value": show_value(models, ty, v)})
    if ty == NAT:
        ref = reference_value(t)
        rep.meta["reference"] = ref
        if ref < args.stage:
            rep.add("REF", "the staged value equals the reference value",
                    None if v == ref else {"staged": v, "reference": ref})
        else:
            rep.add("REF", "the staged value equals the reference value", verdict=Verdict.SKIP,
                    detail=f"the value {ref} is truncated at stage {args.stage}")
    if args.consistency is not None:
        _merge(rep, check_consistency(t, args.stage, args.consistency, args.bound, models))
    return rep


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")

    p = _Parser(prog="potfin", description="Check the laws of staged finite approximation structures.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="check the system and target laws")
    c.add_argument("system", help="builtin name (nat, bool, dyadic, parity) or a JSON definition file")
    c.add_argument("--laws", default="all", help="comma-separated law ids, or 'all'")
    c.add_argument("--max-stage", type=int)
    c.add_argument("--jobs", type=int, default=1, help="run independent checks in parallel")
    c.set_defaults(run=cmd_check)

    c = sub.add_parser("limit", parents=[common], help="enumerate dynamic elements and check the limit")
    c.add_argument("system")
    c.add_argument("--max-stage", type=int)
    c.set_defaults(run=cmd_limit)

    c = sub.add_parser("funspace", parents=[common], help="check a function-space system")
    c.add_argument("dom")
    c.add_argument("cod")
    c.add_argument("--max-stage", type=int)
    c.add_argument("--verify-iso", action="store_true",
                   help="compare with the internal system of the function space of carriers")
    c.set_defaults(run=cmd_funspace)

    c = sub.add_parser("continuity", parents=[common], help="compute the continuity witness grid")
    c.add_argument("--fn", required=True, help="id, succ, const:<n> or forall")
    c.add_argument("--max-i", type=int, default=8)
    c.add_argument("--max-j", type=int, default=8)
    c.set_defaults(run=cmd_continuity)

    c = sub.add_parser("eval", parents=[common], help="evaluate a typed lambda term at a stage")
    c.add_argument("term")
    c.add_argument("--stage", type=int, required=True)
    c.add_argument("--consistency", type=int, metavar="S2", help="also check against stage S2 >= stage")
    c.add_argument("--bound", type=int, default=8)
    c.set_defaults(run=cmd_eval)
    return p


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        rep = args.run(args).sorted()
    except ResourceError as e:
        print(f"potfin: resource cap: {e}", file=err)
        return EXIT_RESOURCE
    except InputError as e:
        print(f"potfin: error: {e}", file=err)
        return EXIT_INPUT
    print(rep.to_json(indent=2) if args.format == "json" else rep.to_text(), file=out)
    return EXIT_FAIL if rep.failures else EXIT_OK


def main() -> None:
    sys.exit(run())
