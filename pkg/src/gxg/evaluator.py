"""Concrete semantics of graph extension grammars and a brute-force oracle.

Evaluating a tree is nondeterministic: every extension step chooses clone
multiplicities and context targets.  :func:`evaluate` explores all choices
(up to a clone bound), :func:`sample_evaluation` picks one at random, and
:class:`SizeBoundedLanguage` builds every graph of a grammar up to a node
count, which makes :func:`brute_membership` exact for graphs of that size.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .algebra import (
    EmptyOperation,
    ExtensionChoice,
    ExtensionOperation,
    UnionOperation,
    apply_extension,
    enumerate_choices,
    union,
    union_renaming,
)
from .errors import BadChoice
from .graph import EMPTY, Graph, IsoSet, NodeId, find_isomorphism, reach
from .rtg import Address, Grammar, Production, Tree, derive_sample, enumerate_trees


@dataclass
class ConcreteEvaluation:
    """A tree together with the graph built at every address and the choices made."""

    tree: Tree
    graphs: dict[Address, Graph]
    choices: dict[Address, ExtensionChoice] = field(default_factory=dict)
    nonterminals: dict[Address, str] = field(default_factory=dict)

    @property
    def graph(self) -> Graph:
        return self.graphs[()]

    def shifted(self, k: int) -> "ConcreteEvaluation":
        """The same evaluation seen as the ``k``-th child of a new root."""
        return ConcreteEvaluation(
            self.tree,
            {(k,) + a: g for a, g in self.graphs.items()},
            {(k,) + a: c for a, c in self.choices.items()},
            {(k,) + a: n for a, n in self.nonterminals.items()},
        )

    def renamed(self, mapping: Mapping[NodeId, NodeId]) -> "ConcreteEvaluation":
        if not mapping:
            return self
        return ConcreteEvaluation(
            self.tree,
            {a: g.rename(mapping) for a, g in self.graphs.items()},
            {a: c.renamed(mapping) for a, c in self.choices.items()},
            dict(self.nonterminals),
        )

    def to_json(self) -> dict:
        return {
            "tree": self.tree.to_json(),
            "choices": {_addr_key(a): c.to_json() for a, c in sorted(self.choices.items())},
            "nonterminals": {_addr_key(a): n for a, n in sorted(self.nonterminals.items())},
        }


def _addr_key(a: Address) -> str:
    return ".".join(map(str, a))


def parse_addr_key(s: str) -> Address:
    return tuple(int(x) for x in s.split(".")) if s else ()


def _full_choice(phi: ExtensionOperation, H: Graph, choice: ExtensionChoice) -> ExtensionChoice:
    """``choice`` with the ids given to new nodes filled in from the result."""
    new = {u: v for u, v in zip(phi.ports, H.ports) if u in phi.new_nodes}
    return ExtensionChoice(dict(choice.context), {c: tuple(t) for c, t in choice.clones.items()}, new)


def _combine(op_name: str, op, kids: list[ConcreteEvaluation], H: Graph,
             choice: ExtensionChoice | None, lhs: str | None = None) -> ConcreteEvaluation:
    tree = Tree(op_name, tuple(k.tree for k in kids))
    graphs: dict[Address, Graph] = {(): H}
    choices: dict[Address, ExtensionChoice] = {}
    nts: dict[Address, str] = {}
    for i, k in enumerate(kids, 1):
        s = k.shifted(i)
        graphs.update(s.graphs)
        choices.update(s.choices)
        nts.update(s.nonterminals)
    if choice is not None:
        choices[()] = choice
    if lhs is not None:
        nts[()] = lhs
    return ConcreteEvaluation(tree, graphs, choices, nts)


# -- full evaluation ---------------------------------------------------------------

def evaluate(g: Grammar, t: Tree, clone_bound: int | None = 2) -> list[tuple[Graph, ConcreteEvaluation]]:
    """Every graph of ``val(t)`` reachable with clone multiplicities up to
    ``clone_bound``, one per isomorphism class, each with an evaluation."""

    def rec(s: Tree) -> list[ConcreteEvaluation]:
        op = g.operations[s.op]
        if isinstance(op, EmptyOperation):
            return [ConcreteEvaluation(s, {(): EMPTY})]
        kids = [rec(c) for c in s.children]
        found = IsoSet()
        out: list[ConcreteEvaluation] = []
        if isinstance(op, UnionOperation):
            for e1 in kids[0]:
                for e2 in kids[1]:
                    ren = union_renaming(e1.graph, e2.graph)
                    e2r = e2.renamed(ren)
                    H = union(e1.graph, e2r.graph)
                    if found.add(H):
                        out.append(_combine(s.op, op, [e1, e2r], H, None))
            return out
        for e in kids[0]:
            for choice in enumerate_choices(op, e.graph, clone_bound):
                H = apply_extension(op, e.graph, choice)
                if found.add(H):
                    out.append(_combine(s.op, op, [e], H, _full_choice(op, H, choice)))
        return out

    return [(e.graph, e) for e in rec(t)]


def sample_evaluation(g: Grammar, t: Tree, clone_bound: int | None = 2,
                      seed: int | None = 0, attempts: int = 20) -> ConcreteEvaluation | None:
    """One evaluation of ``t`` with uniformly chosen extension choices.

    Returns ``None`` when no attempt found valid choices everywhere.
    """
    rng = random.Random(seed)

    def rec(s: Tree) -> ConcreteEvaluation | None:
        op = g.operations[s.op]
        if isinstance(op, EmptyOperation):
            return ConcreteEvaluation(s, {(): EMPTY})
        kids = []
        for c in s.children:
            k = rec(c)
            if k is None:
                return None
            kids.append(k)
        if isinstance(op, UnionOperation):
            e1, e2 = kids
            e2 = e2.renamed(union_renaming(e1.graph, e2.graph))
            return _combine(s.op, op, [e1, e2], union(e1.graph, e2.graph), None)
        options = list(enumerate_choices(op, kids[0].graph, clone_bound))
        if not options:
            return None
        choice = rng.choice(options)
        H = apply_extension(op, kids[0].graph, choice)
        return _combine(s.op, op, kids, H, _full_choice(op, H, choice))

    for _ in range(attempts):
        ev = rec(t)
        if ev is not None:
            return ev
    return None


def sample_graph(g: Grammar, depth_bound: int, clone_bound: int | None = 2, seed: int | None = 0,
                 attempts: int = 50, start: str | None = None) -> ConcreteEvaluation | None:
    """Evaluation of a random tree, drawing new trees until one has a value.

    Deterministic for a given seed.  Raises ``NoTreeWithinDepth`` when the
    depth bound admits no tree at all.
    """
    rng = random.Random(seed)
    A = start or g.initial
    for _ in range(attempts):
        sub = rng.randrange(2 ** 32)
        t = derive_sample(g, A, depth_bound, sub)
        ev = sample_evaluation(g, t, clone_bound, sub, attempts=5)
        if ev is not None:
            return ev
    return None


def replay(g: Grammar, tree: Tree, choices: Mapping[Address, ExtensionChoice]) -> Graph:
    """Rebuild the graph of a recorded evaluation; node ids are reproduced exactly."""

    def rec(s: Tree, a: Address) -> Graph:
        op = g.operations[s.op]
        if isinstance(op, EmptyOperation):
            return EMPTY
        args = [rec(c, a + (i,)) for i, c in enumerate(s.children, 1)]
        if isinstance(op, UnionOperation):
            G1, G2 = args
            clash = set(G1.nodes) & set(G2.nodes)
            if clash:
                raise BadChoice(f"union at {a!r} is not disjoint: {sorted(clash)[:3]}")
            return union(G1, G2)
        if a not in choices:
            raise BadChoice(f"no choice recorded for the extension at {a!r}")
        return apply_extension(op, args[0], choices[a])

    return rec(tree, ())


# -- invariants of concrete evaluations ------------------------------------------------

def reach_identity_violations(ev: ConcreteEvaluation) -> list[Address]:
    """Addresses where the graph differs from what its ports reach in the final graph."""
    top = ev.graph
    bad = []
    for a, G in sorted(ev.graphs.items()):
        if reach(top, G.ports) != G:
            bad.append(a)
    return bad


def empty_at_untyped_violations(ev: ConcreteEvaluation) -> list[Address]:
    """Addresses with no ports whose graph is not empty."""
    return [a for a, G in sorted(ev.graphs.items()) if not G.ports and not G.is_empty()]


def check_evaluation(ev: ConcreteEvaluation) -> None:
    bad = reach_identity_violations(ev)
    if bad:
        raise AssertionError(f"reach identity fails at {bad}")
    bad = empty_at_untyped_violations(ev)
    if bad:
        raise AssertionError(f"non-empty type-0 graph at {bad}")


# -- language slices -------------------------------------------------------------------

@dataclass
class LanguageSlice:
    graphs: list[Graph]
    evaluations: list[ConcreteEvaluation]
    truncated: bool


def language_slice(g: Grammar, depth_bound: int, clone_bound: int | None = 2,
                   limit: int | None = None, start: str | None = None) -> LanguageSlice:
    """Graphs of all trees up to ``depth_bound``, iso-deduplicated, at most ``limit`` of them."""
    found = IsoSet()
    evs: list[ConcreteEvaluation] = []
    if limit is not None and limit <= 0:
        return LanguageSlice([], [], False)
    for t in enumerate_trees(g, start or g.initial, depth_bound):
        for H, ev in evaluate(g, t, clone_bound):
            if found.add(H):
                evs.append(ev)
                if limit is not None and len(found) >= limit:
                    return LanguageSlice(list(found), evs, True)
    return LanguageSlice(list(found), evs, False)


@dataclass
class _Entry:
    graph: Graph
    production: Production
    args: tuple[int, ...]
    choice: ExtensionChoice | None
    renaming: dict[NodeId, NodeId]


class SizeBoundedLanguage:
    """All graphs derivable from each nonterminal with at most ``max_nodes`` nodes.

    Every intermediate graph of a concrete evaluation is a subgraph of the
    final one, so this set is complete for graphs of up to ``max_nodes``
    nodes, whatever the derivation depth.  ``within`` optionally restricts
    construction to graphs whose node labels and labelled edge kinds fit
    into a given graph (still complete for membership of that graph).
    """

    def __init__(self, g: Grammar, max_nodes: int, clone_bound: int | None = None,
                 within: Graph | None = None, max_rounds: int | None = None):
        self.grammar = g
        self.max_nodes = max_nodes
        self.clone_bound = clone_bound
        self._labels = None if within is None else Counter(within.labels.values())
        self._kinds = None if within is None else _edge_kinds(within)
        self.sets: dict[str, IsoSet] = {A: IsoSet() for A in g.nonterminals}
        self.entries: dict[str, list[_Entry]] = {A: [] for A in g.nonterminals}
        self.rounds = 0
        self._build(max_rounds)

    def _fits(self, H: Graph) -> bool:
        if len(H) > self.max_nodes:
            return False
        if self._labels is not None:
            if Counter(H.labels.values()) - self._labels:
                return False
            if _edge_kinds(H) - self._kinds:
                return False
        return True

    def _add(self, A: str, entry: _Entry) -> bool:
        if not self._fits(entry.graph):
            return False
        if self.sets[A].add(entry.graph):
            self.entries[A].append(entry)
            return True
        return False

    def _build(self, max_rounds: int | None) -> None:
        g = self.grammar
        done = {A: 0 for A in g.nonterminals}  # entries already combined as "old"
        while max_rounds is None or self.rounds < max_rounds:
            self.rounds += 1
            size = {A: len(self.entries[A]) for A in g.nonterminals}
            added = False
            for p in g.productions:
                op = g.operations[p.op]
                if isinstance(op, EmptyOperation):
                    if self.rounds == 1:
                        added |= self._add(p.lhs, _Entry(EMPTY, p, (), None, {}))
                    continue
                if isinstance(op, UnionOperation):
                    B, C = p.rhs
                    for i in range(size[B]):
                        for j in range(size[C]):
                            if i < done[B] and j < done[C]:
                                continue
                            G1, G2 = self.entries[B][i].graph, self.entries[C][j].graph
                            if len(G1) + len(G2) > self.max_nodes:
                                continue
                            ren = union_renaming(G1, G2)
                            H = union(G1, G2.rename(ren) if ren else G2)
                            added |= self._add(p.lhs, _Entry(H, p, (i, j), None, ren))
                    continue
                B = p.rhs[0]
                for i in range(done[B], size[B]):
                    G = self.entries[B][i].graph
                    if len(G) + len(op.new_nodes) > self.max_nodes:
                        continue
                    for choice in enumerate_choices(op, G, self.clone_bound):
                        H = apply_extension(op, G, choice)
                        added |= self._add(p.lhs, _Entry(H, p, (i,), _full_choice(op, H, choice), {}))
            done = size
            if not added and all(len(self.entries[A]) == size[A] for A in g.nonterminals):
                break

    def graphs(self, A: str | None = None) -> list[Graph]:
        return list(self.sets[A or self.grammar.initial])

    def find(self, G: Graph, A: str | None = None) -> int | None:
        return self.sets[A or self.grammar.initial].index(G)

    def contains(self, G: Graph, A: str | None = None) -> bool:
        return self.find(G, A) is not None

    def evaluation(self, A: str, i: int) -> ConcreteEvaluation:
        """Reconstruct the concrete evaluation behind entry ``i`` of ``A``."""
        e = self.entries[A][i]
        op = self.grammar.operations[e.production.op]
        kids = [self.evaluation(B, j) for B, j in zip(e.production.rhs, e.args)]
        if isinstance(op, UnionOperation):
            kids[1] = kids[1].renamed(e.renaming)
        return _combine(e.production.op, op, kids, e.graph, e.choice, A)

    def evaluations(self, A: str | None = None) -> Iterator[ConcreteEvaluation]:
        A = A or self.grammar.initial
        for i in range(len(self.entries[A])):
            yield self.evaluation(A, i)


def _edge_kinds(G: Graph) -> Counter:
    return Counter((G.label(s), l, G.label(t)) for s, l, t in G.edges)


def brute_membership(g: Grammar, G: Graph, depth_bound: int | None = None,
                     clone_bound: int | None = None) -> bool:
    """Whether some derivation yields a graph ported-isomorphic to ``G``.

    With no ``depth_bound`` the answer is exact, because only graphs of at
    most ``|G|`` nodes can occur in a derivation of ``G``.
    """
    lang = SizeBoundedLanguage(g, len(G), clone_bound, within=G, max_rounds=depth_bound)
    return lang.contains(G)


def brute_witness(g: Grammar, G: Graph) -> tuple[ConcreteEvaluation, dict[NodeId, NodeId]] | None:
    """An evaluation producing a copy of ``G`` and the isomorphism onto ``G``."""
    lang = SizeBoundedLanguage(g, len(G), None, within=G)
    i = lang.find(G)
    if i is None:
        return None
    ev = lang.evaluation(g.initial, i)
    return ev, find_isomorphism(ev.graph, G)
