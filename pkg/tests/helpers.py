"""Shared fixtures: small builders, the figure instances and a grammar corpus."""

from __future__ import annotations

import random

from gxg.algebra import EMPTY_OP, ExtensionOperation, UnionOperation, apply_extension, enumerate_choices
from gxg.graph import Graph, new_graph
from gxg.io import data_path, load_grammar, load_graph
from gxg.rtg import Grammar, Production


def edges(*specs: str) -> list[tuple[str, str, str]]:
    """``"s-l->t"`` strings to edge triples."""
    out = []
    for s in specs:
        src, rest = s.split("-", 1)
        lab, tgt = rest.split("->")
        out.append((src, lab, tgt))
    return out


def graph(labels: dict, es=(), ports=()) -> Graph:
    return new_graph(labels, labels, edges(*es) if es and isinstance(es[0], str) else es, list(ports))


def ext(labels: dict, es=(), ports=(), docks=(), clonable=()) -> ExtensionOperation:
    return ExtensionOperation(labels, edges(*es), list(ports), list(docks), clonable)


def grammar(nts: dict, ops: dict, prods: list, initial: str = "S") -> Grammar:
    ops = dict(ops)
    ops.setdefault("phi", EMPTY_OP)
    ps = [Production(p[0], p[1], tuple(p[2:])) for p in prods]
    return Grammar(dict(nts), ops, ps, initial)


# -- figure instances ------------------------------------------------------------------

def fig5() -> Grammar:
    return load_grammar(data_path("fig5_amr.json"))


def fig6_graph() -> Graph:
    return load_graph(data_path("fig6_graph.json"))


def fig2_graph() -> Graph:
    labels = {"nx1": "b", "nx2": "a", "nx3": "b", "ny1": "c", "ny2": "c", "ny3": "b", "ny4": "b", "ny5": "a"}
    es = edges("nx1-e->nx2", "nx1-e->ny1", "nx1-e->ny2", "nx2-e->ny2", "nx2-e->ny3", "nx2-e->ny5")
    return new_graph(labels, labels, es, ["nx1", "nx2", "nx3"])


def fig3_operation() -> ExtensionOperation:
    labels = {"x1": "b", "x2": "a", "x3": "b", "y1": None, "y2": "c", "y3": "b", "y4": None, "y5": None}
    return ExtensionOperation(
        labels,
        edges("x1-e->x2", "x1-e->y1", "x1-e->y2", "x2-e->y2", "x2-e->y3", "x2-e->y5"),
        ["x1", "x2", "y4", "x3"],
        ["y1", "y4", "y5"],
        ["y2"],
    )


def fig3_graph() -> Graph:
    labels = {"z1": "c", "u2": "b", "z2": "a", "u1": "c", "v1": "a", "v2": "c", "v3": "c", "w1": "b",
              "w2": "b", "w3": "a"}
    es = edges("z1-e->u1", "z2-e->v3", "u1-e->v1", "u1-e->v2", "u2-e->w1", "u2-e->v3", "v2-e->w1",
               "v2-e->w2", "v3-e->w2", "v3-e->w3")
    return new_graph(labels, labels, es, ["z1", "u2", "z2"])


def fig4_graph(clone_targets: tuple[str, ...], b_target: str) -> Graph:
    """The expected result for the given clone images and image of the b context node."""
    G = fig3_graph()
    labels = dict(G.labels)
    labels.update({"x1": "b", "x2": "a", "x3": "b"})
    es = set(G.edges)
    es |= set(edges("x1-e->x2", "x1-e->z1", "x2-e->z2", f"x2-e->{b_target}"))
    for c in clone_targets:
        es |= set(edges(f"x1-e->{c}", f"x2-e->{c}"))
    return new_graph(labels, labels, es, ["x1", "x2", "u2", "x3"])


def fig8_operation() -> ExtensionOperation:
    labels = {"x1": "a", "x2": "a", "x3": None, "u": "c", "dl1": None, "dl3": None}
    return ExtensionOperation(
        labels,
        edges("x2-beta->x3", "x2-alpha->u", "x2-alpha->dl1", "x2-alpha->dl3", "x1-beta->dl1"),
        ["x1", "x2", "x3"],
        ["dl1", "x3", "dl3"],
    )


def fig8_graph(brown_reachable: bool = True) -> Graph:
    labels = {"v1": "a", "v2": "a", "v3": "b", "brown": "c", "d3": "c", "d1": "c"}
    es = ["v2-beta->v3", "v2-alpha->brown", "v2-alpha->d3", "v2-alpha->d1", "v1-beta->d1"]
    if brown_reachable:
        es.append("v3-f->brown")
    return new_graph(labels, labels, edges(*es), ["v1", "v2", "v3"])


# -- test grammar corpus -----------------------------------------------------------------

def _leaf(lab="a"):
    return ext({"n": lab}, (), ["n"])


def corpus() -> dict[str, Grammar]:
    """Small grammars exercising every feature of the formalism."""
    G: dict[str, Grammar] = {}
    leaf_a, leaf_b = _leaf("a"), _leaf("b")
    grow = ext({"n": "a", "d": None}, ["n-e->d"], ["n"], ["d"])

    G["chain"] = grammar({"S": 1, "Z": 0}, {"leaf": leaf_a, "grow": grow},
                         [("S", "grow", "S"), ("S", "leaf", "Z"), ("Z", "phi")])

    node = ext({"n": "a", "l": None, "r": None}, ["n-l->l", "n-r->r"], ["n"], ["l", "r"])
    G["bintree"] = grammar({"S": 1, "T": 2, "Z": 0}, {"node": node, "u11": UnionOperation(1, 1), "leaf": leaf_b},
                           [("S", "node", "T"), ("T", "u11", "S", "S"), ("S", "leaf", "Z"), ("Z", "phi")])

    back = ext({"n": "a", "d": None, "c": "a"}, ["n-e->d", "n-f->c"], ["n"], ["d"])
    G["backref"] = grammar({"S": 1, "Z": 0}, {"leaf": leaf_a, "grow": grow, "back": back},
                           [("S", "grow", "S"), ("S", "back", "S"), ("S", "leaf", "Z"), ("Z", "phi")])

    hub = ext({"h": "h", "d": None, "k": "a"}, ["h-e->d", "h-f->k"], ["h"], ["d"], ["k"])
    G["clonefan"] = grammar({"S": 1, "Z": 0}, {"leaf": leaf_a, "grow": grow, "hub": hub},
                            [("S", "grow", "S"), ("S", "hub", "S"), ("S", "leaf", "Z"), ("Z", "phi")])

    mk2 = ext({"x": "a", "y": "b"}, ["x-e->y"], ["x", "y"])
    close = ext({"c": "c", "d1": None, "d2": None}, ["c-e->d1", "c-f->d2"], ["c"], ["d1", "d2"])
    step2 = ext({"x": "a", "y": "b", "d1": None, "d2": None}, ["x-e->d1", "y-e->d2"], ["x", "y"], ["d1", "d2"])
    G["pairs"] = grammar({"S": 1, "P": 2, "Z": 0}, {"mk2": mk2, "close": close, "step2": step2},
                         [("S", "close", "P"), ("P", "step2", "P"), ("P", "mk2", "Z"), ("Z", "phi")])

    ctl = ext({"v": "v", "d1": None, "d2": None}, ["v-e->d1", "v-f->d2"], ["d1", "v"], ["d1", "d2"])
    top = ext({"t": "t", "d1": None, "d2": None}, ["t-e->d1", "t-f->d2"], ["t"], ["d1", "d2"])
    G["control"] = grammar({"S": 1, "C": 2, "U": 2, "Z": 0},
                           {"leaf": leaf_a, "u11": UnionOperation(1, 1), "ctl": ctl, "top": top},
                           [("S", "top", "C"), ("C", "ctl", "U"), ("C", "ctl", "C"), ("U", "u11", "S", "S"),
                            ("S", "leaf", "Z"), ("Z", "phi")])

    G["padunion"] = grammar({"S": 1, "Z": 0}, {"leaf": leaf_a, "grow": grow, "u10": UnionOperation(1, 0)},
                            [("S", "u10", "S", "Z"), ("S", "grow", "S"), ("S", "leaf", "Z"), ("Z", "phi")])

    swap = ext({"p": None, "q": None}, [], ["q", "p"], ["p", "q"])
    G["swap"] = grammar({"S": 1, "P": 2, "Z": 0}, {"mk2": mk2, "close": close, "swap": swap, "step2": step2},
                        [("S", "close", "P"), ("P", "swap", "P"), ("P", "step2", "P"), ("P", "mk2", "Z"),
                         ("Z", "phi")])

    iso = ext({"n": "a", "d": None, "q": "b"}, ["n-e->d"], ["n"], ["d"])
    join = ext({"j": "j", "d1": None, "d2": None}, ["j-e->d1", "j-f->d2"], ["j"], ["d1", "d2"])
    hide = ext({"j": "j", "d1": None}, ["j-e->d1"], ["j"], ["d1"])
    G["isolated"] = grammar({"S": 1, "T": 2, "B": 1, "Z": 0},
                            {"leaf": leaf_a, "leafb": leaf_b, "iso": iso, "u11": UnionOperation(1, 1),
                             "join": join, "hide": hide},
                            [("S", "iso", "S"), ("S", "join", "T"), ("T", "u11", "S", "B"), ("B", "leafb", "Z"),
                             ("S", "hide", "B"), ("S", "leaf", "Z"), ("Z", "phi")])

    isoc = ext({"n": "a", "d": None, "q": "b"}, ["n-e->d"], ["n"], ["d"], ["q"])
    G["isoclone"] = grammar({"S": 1, "Z": 0}, {"leaf": leaf_a, "isoc": isoc},
                            [("S", "isoc", "S"), ("S", "leaf", "Z"), ("Z", "phi")])

    ghost = ext({"g": "a"}, [], [], [], ["g"])
    burn = ext({"g": "a"}, [], [], [], [])
    G["typezero"] = grammar({"S": 1, "Z": 0, "Y": 0, "W": 0},
                            {"leaf": leaf_a, "grow": grow, "ghost": ghost, "burn": burn,
                             "u00": UnionOperation(0, 0), "tag": ext({"n": "b"}, [], ["n"])},
                            [("S", "grow", "S"), ("S", "leaf", "Z"), ("S", "tag", "W"), ("Z", "ghost", "Y"),
                             ("Y", "phi"), ("W", "burn", "Y"), ("Z", "u00", "Y", "Y")])

    G["unproductive"] = grammar({"S": 1, "Q": 1, "Z": 0}, {"leaf": leaf_a, "grow": grow},
                                [("S", "grow", "S"), ("S", "grow", "Q"), ("Q", "grow", "Q"), ("S", "leaf", "Z"),
                                 ("Z", "phi")])

    twin = ext({"n": "a", "d1": None, "d2": None}, ["n-e->d1", "n-e->d2"], ["n"], ["d1", "d2"])
    G["twins"] = grammar({"S": 1, "T": 2, "Z": 0}, {"leaf": leaf_a, "leafb": leaf_b, "twin": twin,
                                                    "u11": UnionOperation(1, 1)},
                         [("S", "twin", "T"), ("T", "u11", "S", "S"), ("S", "leaf", "Z"), ("S", "leafb", "Z"),
                          ("Z", "phi")])

    loop = ext({"n": "a", "d": None}, ["n-e->d", "n-s->n"], ["n"], ["d"])
    G["selfloop"] = grammar({"S": 1, "Z": 0}, {"leaf": leaf_a, "loop": loop, "grow": grow},
                            [("S", "loop", "S"), ("S", "grow", "S"), ("S", "leaf", "Z"), ("Z", "phi")])

    pair_new = ext({"x": "a", "y": "b", "d": None}, ["x-e->y", "y-f->d", "x-g->x"], ["x", "y"], ["d"])
    fold = ext({"c": "c", "d1": None, "d2": None}, ["c-e->d1", "c-e->d2"], ["c"], ["d1", "d2"])
    G["newedges"] = grammar({"S": 1, "P": 2, "Z": 0}, {"leaf": leaf_a, "pair": pair_new, "fold": fold},
                            [("S", "fold", "P"), ("P", "pair", "S"), ("S", "leaf", "Z"), ("Z", "phi")])

    mixed = ext({"h": "h", "d": None, "k": "a", "m": "a"}, ["h-e->d", "h-f->k", "h-f->m"], ["h"], ["d"], ["k"])
    G["mixedclone"] = grammar({"S": 1, "Z": 0}, {"leaf": leaf_a, "grow": grow, "mixed": mixed},
                              [("S", "grow", "S"), ("S", "mixed", "S"), ("S", "leaf", "Z"), ("Z", "phi")])

    two = ext({"h": "h", "d": None, "k": "a", "j": "b"}, ["h-e->d", "h-f->k", "h-g->j"], ["h"], ["d"], ["k", "j"])
    G["twoclones"] = grammar({"S": 1, "Z": 0}, {"leaf": leaf_a, "leafb": leaf_b, "grow": grow, "two": two,
                                                "growb": ext({"n": "b", "d": None}, ["n-e->d"], ["n"], ["d"])},
                             [("S", "growb", "S"), ("S", "grow", "S"), ("S", "two", "S"), ("S", "leaf", "Z"),
                              ("Z", "phi")])

    shared = ext({"x": "x", "y": "y", "d": None, "c": "a"}, ["x-e->d", "x-f->c", "y-f->c"], ["x", "y"], ["d"])
    merge = ext({"m": "m", "d1": None, "d2": None}, ["m-e->d1", "m-e->d2"], ["m"], ["d1", "d2"])
    G["sharedctx"] = grammar({"S": 1, "P": 2, "Z": 0}, {"leaf": leaf_a, "grow": grow, "shared": shared,
                                                        "merge": merge},
                             [("S", "merge", "P"), ("P", "shared", "S"), ("S", "grow", "S"), ("S", "leaf", "Z"),
                              ("Z", "phi")])

    tri = ext({"t": "t", "d1": None, "d2": None, "d3": None}, ["t-a->d1", "t-b->d2", "t-c->d3"], ["t"],
              ["d1", "d2", "d3"])
    G["union21"] = grammar({"S": 1, "P": 2, "R": 3, "Z": 0},
                           {"leaf": leaf_a, "leafb": leaf_b, "u11": UnionOperation(1, 1),
                            "u21": UnionOperation(2, 1), "tri": tri},
                           [("S", "tri", "R"), ("R", "u21", "P", "S"), ("P", "u11", "S", "S"), ("S", "leaf", "Z"),
                            ("S", "leafb", "Z"), ("Z", "phi")])

    reach2 = ext({"n": "n", "d1": None, "d2": None}, ["n-e->d1"], ["n", "d2"], ["d1", "d2"])
    link = ext({"x": "a", "d": None}, ["x-e->d"], ["x"], ["d"])
    finish = ext({"f": "f", "d1": None, "d2": None}, ["f-e->d1", "f-g->d2"], ["f"], ["d1", "d2"])
    G["dockport"] = grammar({"S": 1, "P": 2, "Z": 0},
                            {"leaf": leaf_a, "link": link, "u11": UnionOperation(1, 1), "reach2": reach2,
                             "finish": finish},
                            [("S", "finish", "P"), ("P", "reach2", "P"), ("P", "u11", "S", "S"), ("S", "link", "S"),
                             ("S", "leaf", "Z"), ("Z", "phi")])

    # a failed first branch leaves (Q, swapped ports) cached as negative; only iteration repairs it
    close3 = ext({"c": "c", "d1": None, "d2": None, "d3": None}, ["c-e->d1", "c-f->d2", "c-g->d3"], ["c"],
                 ["d1", "d2", "d3"])
    close3b = ext({"c": "c", "d1": None, "d2": None, "d3": None}, ["c-f->d1", "c-e->d2", "c-g->d3"], ["c"],
                  ["d1", "d2", "d3"])
    G["stale"] = grammar({"S": 1, "T": 3, "U": 3, "P": 2, "Q": 2, "Y": 1, "B": 1, "Z": 0},
                         {"close3": close3, "close3b": close3b, "u21": UnionOperation(2, 1), "swap": swap,
                          "mk2": mk2, "leafy": _leaf("y"), "leafb": leaf_b},
                         [("S", "close3", "T"), ("S", "close3b", "U"), ("T", "u21", "P", "Y"),
                          ("U", "u21", "Q", "B"), ("P", "swap", "Q"), ("P", "mk2", "Z"), ("Q", "swap", "P"),
                          ("Y", "leafy", "Z"), ("B", "leafb", "Z"), ("Z", "phi")])

    amb = ext({"n": "a", "d": None, "c1": "a", "c2": "a"}, ["n-e->d", "n-e->c1", "n-e->c2"], ["n"], ["d"])
    G["ambiguous"] = grammar({"S": 1, "Z": 0}, {"leaf": leaf_a, "grow": grow, "amb": amb},
                             [("S", "grow", "S"), ("S", "amb", "S"), ("S", "leaf", "Z"), ("Z", "phi")])
    return G


# -- random instances -------------------------------------------------------------------------

def random_extension(rng: random.Random, node_labels="ab", edge_labels="ef", max_nodes=8) -> ExtensionOperation:
    """A random operation satisfying both structural requirements."""
    while True:
        n_new = rng.randint(1, 3)
        n_dock = rng.randint(0, 3)
        n_ctx = rng.randint(0, 3)
        if n_new + n_dock + n_ctx > max_nodes:
            continue
        new = [f"x{i}" for i in range(n_new)]
        docks = [f"d{i}" for i in range(n_dock)]
        ctx = [f"c{i}" for i in range(n_ctx)]
        labels = {v: rng.choice(node_labels) for v in new + ctx}
        labels.update({d: None for d in docks})
        es = set()
        for t in docks + ctx + new:
            for s in new:
                for l in edge_labels:
                    if rng.random() < 0.25:
                        es.add((s, l, t))
        dock_ports = [d for d in docks if rng.random() < 0.3]
        for d in docks:
            if d not in dock_ports and not any(t == d for _, _, t in es):
                es.add((rng.choice(new), rng.choice(edge_labels), d))
        ports = new + dock_ports
        rng.shuffle(ports)
        rng.shuffle(docks)
        clon = [c for c in ctx if rng.random() < 0.4]
        return ExtensionOperation(labels, sorted(es), ports, docks, clon)


def random_graph(rng: random.Random, n: int, k: int, node_labels="ab", edge_labels="ef", p_edge=0.25) -> Graph:
    labels = {f"g{i}": rng.choice(node_labels) for i in range(n)}
    ids = list(labels)
    es = [(s, l, t) for s in ids for t in ids for l in edge_labels if s != t and rng.random() < p_edge / 2]
    ports = rng.sample(ids, min(k, n))
    return new_graph(labels, labels, es, ports)


def random_application(rng: random.Random, phi: ExtensionOperation, arg: Graph, clone_bound=2):
    choices = list(enumerate_choices(phi, arg, clone_bound))
    if not choices:
        return None
    c = rng.choice(choices)
    return apply_extension(phi, arg, c), c


def mutations(rng: random.Random, G: Graph, node_labels, edge_labels, count: int) -> list[Graph]:
    """Random single-step corruptions of ``G``: edge relabel/add/delete and node relabel."""
    out = []
    nodes = list(G.nodes)
    es = sorted(G.edges)
    tries = 0
    while len(out) < count and tries < 20 * count:
        tries += 1
        kind = rng.choice(["relabel_edge", "add_edge", "del_edge", "relabel_node"])
        labels = dict(G.labels)
        new_es = set(es)
        if kind == "relabel_edge" and es:
            s, l, t = rng.choice(es)
            new_es.discard((s, l, t))
            new_es.add((s, rng.choice([x for x in edge_labels if x != l] or [l]), t))
        elif kind == "add_edge" and nodes:
            new_es.add((rng.choice(nodes), rng.choice(edge_labels), rng.choice(nodes)))
        elif kind == "del_edge" and es:
            new_es.discard(rng.choice(es))
        elif kind == "relabel_node" and nodes:
            v = rng.choice(nodes)
            labels[v] = rng.choice([x for x in node_labels if x != labels[v]] or [labels[v]])
        else:
            continue
        H = Graph(labels, new_es, G.ports)
        if H != G:
            out.append(H)
    return out


def grammar_labels(g: Grammar) -> tuple[list[str], list[str]]:
    nl, el = set(), set()
    for op in g.operations.values():
        if isinstance(op, ExtensionOperation):
            for v in op.graph.nodes:
                if v not in op.docks:
                    nl.add(op.label(v))
            for _, l, _ in op.graph.edges:
                el.add(l)
    return sorted(nl), sorted(el)

