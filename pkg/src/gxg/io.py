"""JSON and DOT serialisation of graphs, grammars and parse witnesses."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from .algebra import EMPTY_OP, EmptyOperation, ExtensionOperation, UnionOperation
from .errors import FormatError, GraphError
from .graph import UNLABELED, Graph, new_graph
from .rtg import Grammar, Production


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise FormatError(msg)


# -- graphs ------------------------------------------------------------------------

def graph_from_json(data: Any) -> Graph:
    _require(isinstance(data, Mapping), "a graph must be a JSON object")
    nodes = data.get("nodes", [])
    edges = data.get("edges", [])
    ports = data.get("ports", [])
    _require(isinstance(nodes, list) and isinstance(edges, list) and isinstance(ports, list),
             "graph fields nodes, edges and ports must be lists")
    ids, labels = [], {}
    for n in nodes:
        _require(isinstance(n, Mapping) and isinstance(n.get("id"), str), f"bad node entry {n!r}")
        _require(n["id"] not in labels, f"duplicate node id {n['id']!r}")
        lab = n.get("label")
        _require(isinstance(lab, str), f"node {n['id']!r} needs a string label")
        _require(lab != UNLABELED, f"node {n['id']!r} uses the reserved label")
        ids.append(n["id"])
        labels[n["id"]] = lab
    es = []
    for e in edges:
        _require(isinstance(e, list) and len(e) == 3 and all(isinstance(x, str) for x in e), f"bad edge {e!r}")
        es.append(tuple(e))
    _require(all(isinstance(v, str) for v in ports), "ports must be node ids")
    try:
        return new_graph(ids, labels, es, ports)
    except GraphError as exc:
        raise FormatError(str(exc)) from exc


def graph_to_json(G: Graph) -> dict:
    return {
        "nodes": [{"id": v, "label": G.label(v)} for v in G.nodes],
        "edges": [list(e) for e in G.sorted_edges()],
        "ports": list(G.ports),
    }


def dumps_graph(G: Graph) -> str:
    return json.dumps(graph_to_json(G), separators=(",", ":"))


# -- grammars --------------------------------------------------------------------------

def operation_from_json(name: str, data: Any):
    _require(isinstance(data, Mapping), f"operation {name!r} must be an object")
    kind = data.get("kind")
    if kind == "empty":
        return EMPTY_OP
    if kind == "union":
        l, r = data.get("left"), data.get("right")
        _require(isinstance(l, int) and isinstance(r, int) and l >= 0 and r >= 0,
                 f"union {name!r} needs nonnegative integer left/right types")
        return UnionOperation(l, r)
    if kind == "extension":
        nodes = data.get("nodes", [])
        _require(isinstance(nodes, list), f"extension {name!r}: nodes must be a list")
        labels: dict[str, str | None] = {}
        for n in nodes:
            _require(isinstance(n, Mapping) and isinstance(n.get("id"), str), f"extension {name!r}: bad node {n!r}")
            _require(n["id"] not in labels, f"extension {name!r}: duplicate node {n['id']!r}")
            lab = n.get("label")
            _require(lab is None or (isinstance(lab, str) and lab != UNLABELED),
                     f"extension {name!r}: bad label on {n['id']!r}")
            labels[n["id"]] = lab
        docks = data.get("docks", [])
        _require(isinstance(docks, list) and all(isinstance(d, str) for d in docks),
                 f"extension {name!r}: docks must be a list of ids")
        for v, lab in labels.items():
            _require(lab is not None or v in docks, f"extension {name!r}: node {v!r} has no label and is no dock")
        edges = data.get("edges", [])
        _require(isinstance(edges, list) and all(isinstance(e, list) and len(e) == 3 for e in edges),
                 f"extension {name!r}: bad edges")
        try:
            return ExtensionOperation(labels, [tuple(e) for e in edges], data.get("ports", []), docks,
                                      data.get("clonable", []))
        except GraphError as exc:
            raise FormatError(f"extension {name!r}: {exc}") from exc
    raise FormatError(f"operation {name!r} has unknown kind {kind!r}")


def operation_to_json(op) -> dict:
    if isinstance(op, EmptyOperation):
        return {"kind": "empty"}
    if isinstance(op, UnionOperation):
        return {"kind": "union", "left": op.left, "right": op.right}
    docks = set(op.docks)
    return {
        "kind": "extension",
        "nodes": [{"id": v} if v in docks else {"id": v, "label": op.label(v)} for v in op.graph.nodes],
        "edges": [list(e) for e in op.graph.sorted_edges()],
        "ports": list(op.ports),
        "docks": list(op.docks),
        "clonable": sorted(op.clonable),
    }


def grammar_from_json(data: Any) -> Grammar:
    _require(isinstance(data, Mapping), "a grammar must be a JSON object")
    ops_raw = data.get("operations")
    nts = data.get("nonterminals")
    prods = data.get("productions")
    _require(isinstance(ops_raw, Mapping), "grammar needs an 'operations' object")
    _require(isinstance(nts, Mapping) and all(isinstance(t, int) for t in nts.values()),
             "grammar needs a 'nonterminals' object mapping names to types")
    _require(isinstance(prods, list), "grammar needs a 'productions' list")
    _require(isinstance(data.get("initial"), str), "grammar needs an 'initial' nonterminal")
    ops = {name: operation_from_json(name, o) for name, o in ops_raw.items()}
    productions = []
    for i, p in enumerate(prods):
        _require(isinstance(p, Mapping) and isinstance(p.get("lhs"), str) and isinstance(p.get("op"), str),
                 f"production {i} needs string lhs and op")
        rhs = p.get("rhs", [])
        _require(isinstance(rhs, list) and all(isinstance(x, str) for x in rhs), f"production {i}: bad rhs")
        productions.append(Production(p["lhs"], p["op"], tuple(rhs)))
    nl = data.get("node_labels")
    el = data.get("edge_labels")
    return Grammar(
        nonterminals=dict(nts),
        operations=ops,
        productions=productions,
        initial=data["initial"],
        node_labels=None if nl is None else tuple(nl),
        edge_labels=None if el is None else tuple(el),
    )


def grammar_to_json(g: Grammar) -> dict:
    out: dict = {}
    if g.node_labels is not None:
        out["node_labels"] = list(g.node_labels)
    if g.edge_labels is not None:
        out["edge_labels"] = list(g.edge_labels)
    out["operations"] = {name: operation_to_json(op) for name, op in g.operations.items()}
    out["nonterminals"] = dict(g.nonterminals)
    out["productions"] = [{"lhs": p.lhs, "op": p.op, "rhs": list(p.rhs)} for p in g.productions]
    out["initial"] = g.initial
    return out


def _load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def load_graph(path: str | Path) -> Graph:
    return graph_from_json(_load_json(path))


def load_grammar(path: str | Path) -> Grammar:
    return grammar_from_json(_load_json(path))


def data_path(name: str) -> Path:
    """Path of a data file shipped with the package."""
    return Path(__file__).with_name("data") / name


# -- DOT -------------------------------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(G: Graph, name: str = "G") -> str:
    pos = {v: i for i, v in enumerate(G.ports, 1)}
    lines = [f"digraph {_q(name)} {{"]
    for v in G.nodes:
        lab = G.label(v)
        if v in pos:
            lines.append(f"  {_q(v)} [label={_q(f'{lab} ({pos[v]})')}, shape=box];")
        else:
            lines.append(f"  {_q(v)} [label={_q(lab)}];")
    for s, l, t in G.sorted_edges():
        lines.append(f"  {_q(s)} -> {_q(t)} [label={_q(l)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
