"""Command-line front end: ``gxg validate|parse|generate|analyze``.

Exit codes: 0 success or member, 1 invalid grammar, 2 malformed input,
3 non-member.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .analysis import analyze_grammar
from .errors import FormatError, GrammarNotNormalized, GxgError, NoTreeWithinDepth
from .evaluator import language_slice, sample_graph
from .io import _load_json, dumps_graph, grammar_to_json, load_grammar, load_graph, to_dot
from .parser import Witness, parse, replay_witness
from .rtg import Grammar, validate_grammar
from .transform import normalize

EXIT_OK, EXIT_INVALID, EXIT_MALFORMED, EXIT_NONMEMBER = 0, 1, 2, 3


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=False) + "\n")


def _error(code: int, message: str, **extra) -> int:
    _emit({"error": message, **extra})
    return code


def _load_valid(path: str) -> Grammar | int:
    g = load_grammar(path)
    diags = validate_grammar(g)
    if diags:
        return _error(EXIT_INVALID, "invalid grammar", diagnostics=[d.to_json() for d in diags])
    return g


def cmd_validate(args) -> int:
    g = load_grammar(args.grammar)
    diags = validate_grammar(g)
    _emit({"valid": not diags, "diagnostics": [d.to_json() for d in diags]})
    return EXIT_OK if not diags else EXIT_INVALID


def cmd_parse(args) -> int:
    g = _load_valid(args.grammar)
    if isinstance(g, int):
        return g
    G = load_graph(args.graph)
    report = None
    if args.normalize:
        g, report = normalize(g)
    try:
        res = parse(g, G)
    except GrammarNotNormalized as exc:
        return _error(EXIT_INVALID, str(exc))
    out: dict = {"member": res.member}
    if args.witness and res.witness is not None:
        out["witness"] = res.witness.to_json()
    if args.stats:
        out["stats"] = res.stats
    if report is not None:
        out["normal_form_report"] = report.to_json()
    _emit(out)
    return EXIT_OK if res.member else EXIT_NONMEMBER


def _write_graph(G, dot: bool) -> None:
    sys.stdout.write(to_dot(G) if dot else dumps_graph(G) + "\n")


def cmd_generate(args) -> int:
    g = _load_valid(args.grammar)
    if isinstance(g, int):
        return g
    if args.replay:
        data = _load_json(args.replay)
        if isinstance(data, dict) and "witness" in data:
            data = data["witness"]
        try:
            w = Witness.from_json(data)
            G = replay_witness(g, w)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad witness: {exc}") from exc
        _write_graph(G, args.dot)
        return EXIT_OK
    if args.limit is not None and args.limit <= 0:
        return EXIT_OK
    if args.seed is not None:
        try:
            ev = sample_graph(g, args.depth, args.clones, args.seed)
        except NoTreeWithinDepth as exc:
            return _error(EXIT_OK, str(exc))
        if ev is None:
            return _error(EXIT_OK, f"no sampled tree of depth <= {args.depth} could be evaluated")
        _write_graph(ev.graph, args.dot)
        return EXIT_OK
    sl = language_slice(g, args.depth, args.clones, args.limit)
    for G in sl.graphs:
        _write_graph(G, args.dot)
    return EXIT_OK


def cmd_analyze(args) -> int:
    g = _load_valid(args.grammar)
    if isinstance(g, int):
        return g
    g, report = normalize(g)
    out = analyze_grammar(g).to_json()
    out["normal_form_report"] = report.to_json()
    _emit(out)
    return EXIT_OK


def cmd_normalize(args) -> int:
    g = _load_valid(args.grammar)
    if isinstance(g, int):
        return g
    g, report = normalize(g)
    _emit({"grammar": grammar_to_json(g), "normal_form_report": report.to_json()})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gxg", description="Graph extension grammar toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a grammar file")
    p.add_argument("grammar")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("parse", help="decide membership of a graph")
    p.add_argument("grammar")
    p.add_argument("graph")
    p.add_argument("--witness", action="store_true", help="include a derivation witness")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True,
                   help="bring the grammar into normal form first (default: on)")
    p.add_argument("--stats", action="store_true", help="include parser statistics")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("generate", help="produce graphs of the language")
    p.add_argument("grammar")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--clones", type=int, default=1, help="maximum clone multiplicity")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="sample a single derivation")
    p.add_argument("--replay", metavar="WITNESS", help="rebuild the graph of a parse witness")
    p.add_argument("--dot", action="store_true", help="emit Graphviz DOT instead of JSON")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analyze", help="report fast-parsing conditions")
    p.add_argument("grammar")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("normalize", help="print the normal form of a grammar")
    p.add_argument("grammar")
    p.set_defaults(func=cmd_normalize)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        return _error(EXIT_MALFORMED, str(exc))
    except GxgError as exc:
        return _error(EXIT_INVALID, str(exc))


if __name__ == "__main__":
    sys.exit(main())
