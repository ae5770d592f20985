"""Ported, node- and edge-labelled directed graphs.

A graph is a finite node set with exactly one label per node, a set of
labelled directed edges ``(source, label, target)`` and a repetition-free
sequence of *ports*.  The number of ports is the graph's *type*.

Graphs are immutable.  Node identifiers are strings; every iteration over
nodes or edges is done in sorted order so that all results are
deterministic.
"""

from __future__ import annotations

import os
from collections import Counter, deque
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    DuplicatePort,
    SizeLimitExceeded,
    UnknownNode,
    UnknownNodeInEdge,
    UnlabeledNode,
)

NodeId = str
Edge = tuple[NodeId, str, NodeId]

#: Reserved label carried by dock nodes of extension operations.  It is not
#: a member of any node alphabet and ordinary graphs may not use it.
UNLABELED = "<unlabeled>"

DEFAULT_ISO_LIMIT = 64


def iso_node_limit() -> int:
    """Node bound for :func:`ported_isomorphic`, overridable by ``GXG_MAX_ISO_NODES``."""
    raw = os.environ.get("GXG_MAX_ISO_NODES")
    if raw is None:
        return DEFAULT_ISO_LIMIT
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_ISO_LIMIT


class Graph:
    """An immutable ported graph.  Build instances with :func:`new_graph`."""

    __slots__ = ("_labels", "_edges", "_ports", "_out", "_in", "_hash")

    def __init__(self, labels: Mapping[NodeId, str], edges: Iterable[Edge], ports: Sequence[NodeId]):
        # Unvalidated; new_graph() is the checked entry point.
        self._labels = dict(sorted(labels.items()))
        self._edges = frozenset(edges)
        self._ports = tuple(ports)
        out: dict[NodeId, list[tuple[str, NodeId]]] = {v: [] for v in self._labels}
        inc: dict[NodeId, list[tuple[str, NodeId]]] = {v: [] for v in self._labels}
        for s, l, t in sorted(self._edges):
            out[s].append((l, t))
            inc[t].append((l, s))
        self._out = {v: tuple(es) for v, es in out.items()}
        self._in = {v: tuple(es) for v, es in inc.items()}
        self._hash: int | None = None

    # -- accessors -----------------------------------------------------
    @property
    def nodes(self) -> tuple[NodeId, ...]:
        return tuple(self._labels)

    @property
    def labels(self) -> Mapping[NodeId, str]:
        return dict(self._labels)

    @property
    def edges(self) -> frozenset[Edge]:
        return self._edges

    @property
    def ports(self) -> tuple[NodeId, ...]:
        return self._ports

    @property
    def type(self) -> int:
        return len(self._ports)

    def label(self, v: NodeId) -> str:
        try:
            return self._labels[v]
        except KeyError:
            raise UnknownNode(f"unknown node {v!r}") from None

    def __contains__(self, v: object) -> bool:
        return v in self._labels

    def __len__(self) -> int:
        return len(self._labels)

    def out_edges(self, v: NodeId) -> tuple[tuple[str, NodeId], ...]:
        """``(label, target)`` pairs of edges leaving ``v``, sorted."""
        return self._out[v]

    def in_edges(self, v: NodeId) -> tuple[tuple[str, NodeId], ...]:
        """``(label, source)`` pairs of edges entering ``v``, sorted."""
        return self._in[v]

    def sorted_edges(self) -> list[Edge]:
        return sorted(self._edges)

    def is_empty(self) -> bool:
        return not self._labels

    # -- value semantics -------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._ports == other._ports and self._labels == other._labels and self._edges == other._edges

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._ports, frozenset(self._labels.items()), self._edges))
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(nodes={len(self._labels)}, edges={len(self._edges)}, ports={list(self._ports)})"

    def rename(self, mapping: Mapping[NodeId, NodeId]) -> "Graph":
        """Return the graph with node ids replaced via ``mapping`` (identity elsewhere)."""
        f = lambda v: mapping.get(v, v)  # noqa: E731
        return Graph(
            {f(v): l for v, l in self._labels.items()},
            ((f(s), l, f(t)) for s, l, t in self._edges),
            [f(v) for v in self._ports],
        )


EMPTY = Graph({}, (), ())
"""The empty graph: no nodes, no edges, no ports."""


def new_graph(
    nodes: Iterable[NodeId],
    labels: Mapping[NodeId, str],
    edges: Iterable[Edge],
    ports: Sequence[NodeId],
    *,
    unlabeled: Iterable[NodeId] = (),
) -> Graph:
    """Validate the components and build a :class:`Graph`.

    Nodes listed in ``unlabeled`` may lack a label; they receive
    :data:`UNLABELED`.  No other node may carry that reserved label.
    """
    node_set = set(nodes)
    exempt = set(unlabeled)
    final: dict[NodeId, str] = {}
    for v in sorted(node_set):
        if v in labels and labels[v] is not None:
            lab = labels[v]
            if lab == UNLABELED and v not in exempt:
                raise UnlabeledNode(f"node {v!r} uses the reserved label {UNLABELED!r}")
            final[v] = lab
        elif v in exempt:
            final[v] = UNLABELED
        else:
            raise UnlabeledNode(f"node {v!r} has no label")
    stray = set(labels) - node_set
    if stray:
        raise UnknownNode(f"label given for unknown node {sorted(stray)[0]!r}")
    edge_set = set()
    for e in edges:
        s, l, t = e
        for end in (s, t):
            if end not in node_set:
                raise UnknownNodeInEdge(f"edge {(s, l, t)!r} references unknown node {end!r}")
        edge_set.add((s, l, t))
    seen = set()
    for v in ports:
        if v in seen:
            raise DuplicatePort(f"port {v!r} occurs twice")
        if v not in node_set:
            raise UnknownNode(f"port {v!r} is not a node")
        seen.add(v)
    return Graph(final, edge_set, ports)


def _check_sequence(G: Graph, p: Sequence[NodeId]) -> None:
    seen = set()
    for v in p:
        if v not in G:
            raise UnknownNode(f"unknown node {v!r}")
        if v in seen:
            raise DuplicatePort(f"node {v!r} occurs twice in {list(p)!r}")
        seen.add(v)


def reachable(G: Graph, start: Iterable[NodeId]) -> set[NodeId]:
    """Nodes reachable from ``start`` by directed paths (including ``start``)."""
    seen = set()
    todo = deque()
    for v in start:
        if v not in seen:
            seen.add(v)
            todo.append(v)
    while todo:
        v = todo.popleft()
        for _, t in G.out_edges(v):
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def reach(G: Graph, p: Sequence[NodeId]) -> Graph:
    """The subgraph of ``G`` induced by everything reachable from ``p``, ported by ``p``."""
    _check_sequence(G, p)
    keep = reachable(G, p)
    labels = {v: G.label(v) for v in keep}
    edges = [(s, l, t) for s, l, t in G.edges if s in keep]
    return Graph(labels, edges, p)


def node_profile(
    G: Graph,
    p: Sequence[NodeId],
    v: NodeId,
    positions: Iterable[int] | None = None,
) -> frozenset[tuple[int, str, str]]:
    """Triples ``(i, edge label, label of v)`` for every edge ``p[i-1] -> v``.

    ``positions`` (1-based) optionally restricts which port positions count
    as edge sources.
    """
    _check_sequence(G, p)
    if v not in G:
        raise UnknownNode(f"unknown node {v!r}")
    allowed = None if positions is None else set(positions)
    index = {u: i for i, u in enumerate(p, 1)}
    lab = G.label(v)
    out = set()
    for l, s in G.in_edges(v):
        i = index.get(s)
        if i is not None and (allowed is None or i in allowed):
            out.add((i, l, lab))
    return frozenset(out)


# -- isomorphism -----------------------------------------------------------

def _refine(G: Graph, rounds: int = 3) -> dict[NodeId, int]:
    """Weisfeiler-Lehman style colours, seeded by label and port position."""
    pos = {v: i for i, v in enumerate(G.ports, 1)}
    colour = {v: hash((G.label(v), pos.get(v, 0))) for v in G.nodes}
    for _ in range(rounds):
        colour = {
            v: hash((
                colour[v],
                tuple(sorted((l, colour[t]) for l, t in G.out_edges(v))),
                tuple(sorted((l, colour[s]) for l, s in G.in_edges(v))),
            ))
            for v in G.nodes
        }
    return colour


def fingerprint(G: Graph) -> tuple:
    """An isomorphism-invariant summary; equal for ported-isomorphic graphs."""
    colour = _refine(G)
    return (
        len(G),
        len(G.edges),
        tuple(G.label(v) for v in G.ports),
        tuple(sorted(colour.values())),
    )


def find_isomorphism(G1: Graph, G2: Graph, limit: int | None = None) -> dict[NodeId, NodeId] | None:
    """A port-respecting isomorphism ``G1 -> G2`` as a dict, or ``None``."""
    bound = iso_node_limit() if limit is None else limit
    if max(len(G1), len(G2)) > bound:
        raise SizeLimitExceeded(f"isomorphism test on {max(len(G1), len(G2))} nodes exceeds limit {bound}")
    if len(G1) != len(G2) or len(G1.edges) != len(G2.edges) or G1.type != G2.type:
        return None
    if G1.is_empty():
        return {}
    c1, c2 = _refine(G1), _refine(G2)
    if Counter(c1.values()) != Counter(c2.values()):
        return None
    by_colour: dict[int, list[NodeId]] = {}
    for v in G2.nodes:
        by_colour.setdefault(c2[v], []).append(v)

    mapping: dict[NodeId, NodeId] = {}
    for a, b in zip(G1.ports, G2.ports):
        if c1[a] != c2[b]:
            return None
        mapping[a] = b

    # Search order: ports first, then breadth-first over neighbours.
    order = list(G1.ports)
    placed = set(order)
    queue = deque(order)
    rest = sorted(G1.nodes, key=lambda v: (len(by_colour.get(c1[v], ())), v))
    while len(order) < len(G1):
        if not queue:
            v = next(v for v in rest if v not in placed)
            placed.add(v)
            order.append(v)
            queue.append(v)
        v = queue.popleft()
        for _, w in G1.out_edges(v) + G1.in_edges(v):
            if w not in placed:
                placed.add(w)
                order.append(w)
                queue.append(w)

    e2 = G2.edges

    def consistent(x: NodeId, y: NodeId) -> bool:
        for l, t in G1.out_edges(x):
            if t == x:
                if (y, l, y) not in e2:
                    return False
            elif t in mapping and (y, l, mapping[t]) not in e2:
                return False
        for l, s in G1.in_edges(x):
            if s != x and s in mapping and (mapping[s], l, y) not in e2:
                return False
        return True

    for a in G1.ports:
        b = mapping.pop(a)
        if not consistent(a, b):
            return None
        mapping[a] = b

    used = set(mapping.values())
    free = order[len(G1.ports):]

    def extend(k: int) -> bool:
        if k == len(free):
            return True
        x = free[k]
        for y in by_colour.get(c1[x], ()):
            if y in used or not consistent(x, y):
                continue
            mapping[x] = y
            used.add(y)
            if extend(k + 1):
                return True
            del mapping[x]
            used.discard(y)
        return False

    return dict(mapping) if extend(0) else None


def ported_isomorphic(G1: Graph, G2: Graph, limit: int | None = None) -> bool:
    """True iff a label- and edge-preserving bijection maps ports positionally."""
    return find_isomorphism(G1, G2, limit) is not None


class IsoSet:
    """Insertion-ordered collection of graphs, deduplicated up to ported isomorphism."""

    def __init__(self, graphs: Iterable[Graph] = ()):
        self._buckets: dict[tuple, list[int]] = {}
        self._items: list[Graph] = []
        for g in graphs:
            self.add(g)

    def index(self, G: Graph) -> int | None:
        for i in self._buckets.get(fingerprint(G), ()):
            if ported_isomorphic(self._items[i], G):
                return i
        return None

    def add(self, G: Graph) -> bool:
        """Insert ``G``; return False if an isomorphic graph was already present."""
        key = fingerprint(G)
        bucket = self._buckets.setdefault(key, [])
        for i in bucket:
            if ported_isomorphic(self._items[i], G):
                return False
        bucket.append(len(self._items))
        self._items.append(G)
        return True

    def __contains__(self, G: object) -> bool:
        return isinstance(G, Graph) and self.index(G) is not None

    def __iter__(self) -> Iterator[Graph]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, i: int) -> Graph:
        return self._items[i]


def iso_equal(gs1: Iterable[Graph], gs2: Iterable[Graph]) -> bool:
    """Whether two collections contain the same graphs up to ported isomorphism."""
    a, b = IsoSet(gs1), IsoSet(gs2)
    return len(a) == len(b) and all(g in b for g in a)
