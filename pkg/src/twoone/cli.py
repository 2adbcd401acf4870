"""Command-line front end.

Every verb prints one JSON document (``--format json``, the default) or
aligned ``key: value`` text.  Structures are read from JSON structure files;
``-`` reads the structure from stdin, so ``twoone construct prop33a | twoone
inspect --beta 0..13`` works.

Exit status: 0 on success, including unresolved verdicts; 1 when a domain
error is raised; 2 for bad arguments or malformed structure files.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .constructions import (
    Registry,
    construct_prop31,
    construct_prop32,
    construct_prop33B,
)
from .core import (
    detect_cycle,
    extree_slice,
    orbit_sample,
    region_report,
    tree_slice,
)
from .errors import SpecError, TwoOneError
from .isobuilder import (
    IsoConfig,
    PartialIso,
    build_extree_iso,
    build_structure_iso,
    build_tree_iso,
    verify_partial_iso,
)
from .families import conjugate, random_permutation
from .specfile import load_json, load_registry, load_structure
from .treeiso import canonical_code, separating_level

DEFAULT_BOUND = 2000
DEFAULT_STEP_CAP = 1000


class ArgumentError(Exception):
    pass


def parse_range(text: str) -> range:
    """``a..b`` inclusive, or a single natural."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise ArgumentError(f"bad range {text!r}; expected a..b") from None
    if lo < 0 or hi < lo:
        raise ArgumentError(f"bad range {text!r}")
    return range(lo, hi + 1)


def _natural(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"{text!r} is negative")
    return v


def _positive(text: str) -> int:
    v = _natural(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _code_text(code) -> str:
    return "".join(str(b) for b in code)


def _emit(doc: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(doc, sort_keys=True) + "\n")
        return
    width = max((len(k) for k in doc), default=0)
    for key in sorted(doc):
        value = doc[key]
        if not isinstance(value, str):
            value = json.dumps(value, sort_keys=True)
        out.write(f"{key.ljust(width)}  {value}\n")


# verbs


def cmd_build(args) -> dict:
    S = load_structure(args.spec)
    n = args.n
    values = {}
    for x in range(n + 1):
        values[str(x)] = S.apply(x) if S.contains(x) else None
    return {
        "label": S.label,
        "oracles": {"beta": S.has_beta, "iso": S.has_iso, "origin": S.oracles.origin.value},
        "values": values,
    }


def cmd_inspect(args) -> dict:
    S = load_structure(args.spec)
    span = parse_range(args.beta) if args.beta else range(0, 21)
    bound = args.bound if args.bound is not None else max(DEFAULT_BOUND, 2 * span[-1] + 2)
    report = region_report(S, span[-1], bound, elements=span)
    doc = report.to_dict()
    doc["label"] = S.label
    if S.has_beta:
        doc["beta"] = {str(x): S.beta(x) for x in sorted(report.region)}
    return doc


def cmd_orbit(args) -> dict:
    S = load_structure(args.spec)
    info = detect_cycle(S, args.x, args.step_cap)
    doc = {"x": args.x, "cycle": info.to_dict()}
    if args.bound is not None:
        steps = args.step_cap if not info.found else info.entry_steps + info.cycle_length
        doc["sample"] = sorted(orbit_sample(S, args.x, min(steps, args.step_cap), args.bound))
    return doc


def _slice_doc(T) -> dict:
    doc = T.to_dict()
    if not T.cyclic_root:
        doc["code"] = _code_text(canonical_code(T))
    return doc


def cmd_tree(args) -> dict:
    S = load_structure(args.spec)
    return _slice_doc(tree_slice(S, args.root, args.depth, args.bound))


def cmd_extree(args) -> dict:
    S = load_structure(args.spec)
    K = args.K
    if K is None:
        info = detect_cycle(S, args.root, args.step_cap)
        if not info.found or args.root not in info.cyclic_elements:
            return {"root": args.root, "verdict": "not-found", "step_cap": args.step_cap}
        K = info.cycle_length
    doc = _slice_doc(extree_slice(S, args.root, K, args.depth, args.bound))
    doc["K"] = K
    return doc


def _iso_config(args) -> IsoConfig:
    return IsoConfig(
        stage_budget=args.stages,
        separating_level_cap=args.sep_cap,
        search_bound=args.bound,
        match_depth=args.match_depth,
        cycle_bound=args.cycle_bound,
    )


def cmd_iso(args) -> dict:
    A = load_structure(args.A)
    if args.B is not None:
        B = load_structure(args.B)
    elif args.seed is not None:
        B = conjugate(A, random_permutation(args.relabel_n, args.seed), label=f"{A.label}@{args.seed}")
    else:
        raise ArgumentError("iso needs --B or --seed")
    cfg = _iso_config(args)
    if args.ks:
        h = build_structure_iso(A, B, args.ks, cfg)
        mode = "structure"
    elif args.a0 is None or args.b0 is None:
        raise ArgumentError("iso needs --a0 and --b0, or --ks")
    elif args.cyclic is not None:
        h = build_extree_iso(A, args.a0, args.cyclic, B, args.b0, cfg)
        mode = "extree"
    else:
        h = build_tree_iso(A, args.a0, B, args.b0, cfg)
        mode = "tree"
    doc = h.to_dict()
    doc["mode"] = mode
    if args.check:
        doc["verify"] = verify_partial_iso(A, B, h).to_dict()
    return doc


def cmd_tree_cmp(args) -> dict:
    A = load_structure(args.A)
    B = load_structure(args.B) if args.B else A
    ta = tree_slice(A, args.x, args.depth, args.bound)
    tb = tree_slice(B, args.y, args.depth, args.bound)
    doc = {"x": args.x, "y": args.y, "depth": args.depth}
    if ta.cyclic_root or tb.cyclic_root:
        doc["isomorphic"] = None
        doc["verdict"] = "cyclic-root"
        return doc
    ca, cb = canonical_code(ta), canonical_code(tb)
    doc.update(code_a=_code_text(ca), code_b=_code_text(cb), isomorphic=ca == cb)
    if not args.B and args.x != args.y:
        n = separating_level(A, args.x, args.y, args.depth, args.bound)
        doc["separating_level"] = n
        doc["verdict"] = "separated" if n is not None else "unresolved"
    return doc


def _construction_doc(args) -> dict:
    name = args.name
    if name == "prop33a":
        return {"structure": {"kind": "closed-form", "name": "prop33a"}, "construction": name}
    if args.stages is None:
        raise ArgumentError(f"construct {name} needs --stages")
    registry = load_registry(args.registry) if args.registry else Registry()
    spec = {
        "kind": "construction",
        "name": name,
        "stages": args.stages,
        "registry": registry.to_json(),
    }
    state = None
    if name == "prop31":
        spec["index"] = args.index
        S, trace = construct_prop31(registry[args.index], args.stages)
    elif name == "prop32":
        S, trace, state = construct_prop32(registry, args.stages)
    else:
        S, trace = construct_prop33B(registry, args.stages)
    doc = {
        "structure": spec,
        "construction": name,
        "elements": len(trace.table),
        "trace": [r.to_dict() for r in trace.per_stage],
    }
    if state is not None:
        doc["state"] = state.to_dict()
    return doc


def cmd_construct(args) -> dict:
    return _construction_doc(args)


def cmd_verify(args) -> dict:
    A = load_structure(args.A)
    B = load_structure(args.B)
    h = PartialIso.from_dict(load_json(args.iso))
    return verify_partial_iso(A, B, h, args.bound).to_dict()


def dot_for(S, root: int, depth: int, bound: int, step_cap: int) -> str:
    """DOT text for the depth-``depth`` tree of ``root``, plus its cycle if it has one."""
    info = detect_cycle(S, root, step_cap)
    cyclic = info.found and root in info.cyclic_elements
    if cyclic:
        T = extree_slice(S, root, info.cycle_length, depth, bound)
        cycle = list(info.cyclic_elements)
    else:
        T = tree_slice(S, root, depth, bound)
        cycle = []
    nodes = sorted(T.nodes() | set(cycle))
    lines = [f'digraph "{S.label or "structure"}" {{', "  rankdir=BT;"]
    for v in nodes:
        shape = "doublecircle" if v == root else "circle"
        lines.append(f"  {v} [shape={shape}];")
    for v in cycle:
        lines.append(f"  {v} -> {S.apply(v)} [style=solid, penwidth=2];")
    for c, p in sorted(T.edges):
        lines.append(f"  {c} -> {p} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export_dot(args) -> Optional[dict]:
    S = load_structure(args.spec)
    text = dot_for(S, args.root, args.depth, args.bound, args.step_cap)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        return {"output": args.output, "root": args.root, "depth": args.depth}
    sys.stdout.write(text)
    return None


# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twoone", description="Explore (2,1):1 structures.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    sub = p.add_subparsers(dest="verb", required=True)

    def spec_arg(sp):
        sp.add_argument("--spec", default="-", help="structure spec file, '-' for stdin")

    sp = sub.add_parser("build", parents=[common], help="load a structure and tabulate f")
    spec_arg(sp)
    sp.add_argument("-n", type=_natural, default=20, help="tabulate f on 0..n")
    sp.set_defaults(run=cmd_build)

    sp = sub.add_parser("inspect", parents=[common], help="branching and hair sets on a range")
    spec_arg(sp)
    sp.add_argument("--beta", metavar="A..B", help="range to classify (default 0..20)")
    sp.add_argument("--bound", type=_natural, default=None)
    sp.set_defaults(run=cmd_inspect)

    sp = sub.add_parser("orbit", parents=[common], help="cycle detection from one element")
    spec_arg(sp)
    sp.add_argument("--x", type=_natural, required=True)
    sp.add_argument("--step-cap", type=_positive, default=DEFAULT_STEP_CAP)
    sp.add_argument("--bound", type=_natural, default=None, help="also sample the orbit to this bound")
    sp.set_defaults(run=cmd_orbit)

    for verb, fn in (("tree", cmd_tree), ("extree", cmd_extree)):
        sp = sub.add_parser(verb, parents=[common], help=f"{verb} slice of an element")
        spec_arg(sp)
        sp.add_argument("--root", type=_natural, required=True)
        sp.add_argument("--depth", type=_natural, default=3)
        sp.add_argument("--bound", type=_natural, default=DEFAULT_BOUND)
        if verb == "extree":
            sp.add_argument("--K", type=_positive, default=None, help="cycle length (detected if omitted)")
            sp.add_argument("--step-cap", type=_positive, default=DEFAULT_STEP_CAP)
        sp.set_defaults(run=fn)

    sp = sub.add_parser("iso", parents=[common], help="build a partial isomorphism")
    sp.add_argument("--A", required=True)
    sp.add_argument("--B", default=None, help="target structure (or use --seed)")
    sp.add_argument("--seed", type=int, default=None, help="target is a random relabeling of --A")
    sp.add_argument("--relabel-n", type=_natural, default=200, help="relabel 0..N (with --seed)")
    sp.add_argument("--a0", type=_natural)
    sp.add_argument("--b0", type=_natural)
    sp.add_argument("--cyclic", type=_positive, metavar="K", help="roots lie on K-cycles")
    sp.add_argument("--ks", type=_positive, nargs="+", help="match all cycles of these lengths")
    sp.add_argument("--stages", type=_positive, default=6)
    sp.add_argument("--sep-cap", type=_positive, default=8)
    sp.add_argument("--match-depth", type=_positive, default=3)
    sp.add_argument("--cycle-bound", type=_natural, default=None)
    sp.add_argument("--bound", type=_positive, default=DEFAULT_BOUND)
    sp.add_argument("--check", action="store_true", help="run the verifier on the result")
    sp.set_defaults(run=cmd_iso)

    sp = sub.add_parser("tree-cmp", parents=[common], help="compare two truncated trees")
    sp.add_argument("--A", required=True)
    sp.add_argument("--B", default=None, help="second structure (default: same as --A)")
    sp.add_argument("--x", type=_natural, required=True)
    sp.add_argument("--y", type=_natural, required=True)
    sp.add_argument("--depth", type=_natural, default=3)
    sp.add_argument("--bound", type=_natural, default=DEFAULT_BOUND)
    sp.set_defaults(run=cmd_tree_cmp)

    sp = sub.add_parser("construct", parents=[common], help="run a stage construction")
    sp.add_argument("name", choices=("prop31", "prop32", "prop33a", "prop33b"))
    sp.add_argument("--stages", type=_natural, default=None)
    sp.add_argument("--registry", default=None, help="registry JSON file")
    sp.add_argument("--index", type=_natural, default=0, help="registry index of chi (prop31)")
    sp.add_argument("--step-cap", type=_positive, default=None, help="accepted for uniformity")
    sp.set_defaults(run=cmd_construct)

    sp = sub.add_parser("verify", parents=[common], help="check a saved partial isomorphism")
    sp.add_argument("--A", required=True)
    sp.add_argument("--B", required=True)
    sp.add_argument("--iso", required=True, help="partial isomorphism JSON")
    sp.add_argument("--bound", type=_natural, default=None)
    sp.set_defaults(run=cmd_verify)

    sp = sub.add_parser("export-dot", parents=[common], help="DOT rendering of a truncated tree")
    spec_arg(sp)
    sp.add_argument("--root", type=_natural, required=True)
    sp.add_argument("--depth", type=_natural, default=3)
    sp.add_argument("--bound", type=_natural, default=DEFAULT_BOUND)
    sp.add_argument("--step-cap", type=_positive, default=DEFAULT_STEP_CAP)
    sp.add_argument("--output", "-o", default=None)
    sp.set_defaults(run=cmd_export_dot)
    return p


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        doc = args.run(args)
    except (ArgumentError, SpecError) as exc:
        sys.stderr.write(f"twoone {args.verb}: {exc}\n")
        return 2
    except TwoOneError as exc:
        sys.stderr.write(f"twoone {args.verb}: {type(exc).__name__}: {exc}\n")
        return 1
    if doc is not None:
        _emit(doc, args.format, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
