"""The operations of a graph extension algebra.

Three kinds of operation exist:

* :data:`EMPTY_OP`, the constant denoting the empty graph;
* :class:`UnionOperation`, disjoint union concatenating the port sequences;
* :class:`ExtensionOperation`, a unary operation that fuses its *docks* with
  the ports of the argument, fuses its *context nodes* with label-matching
  non-ports of the argument (after optionally cloning the clonable ones)
  and adds the remaining (*new*) port nodes together with all its edges.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import BadChoice, CloneOfPort, CloneOfUnknownNode, TypeMismatch, UnknownNode
from .graph import EMPTY, Edge, Graph, IsoSet, NodeId, new_graph


@dataclass(frozen=True)
class Diagnostic:
    """One problem found by a validator."""

    code: str
    message: str
    path: str = ""

    def to_json(self) -> dict:
        return {"code": self.code, "message": self.message, "path": self.path}


# -- operations --------------------------------------------------------------

@dataclass(frozen=True)
class EmptyOperation:
    kind = "empty"

    @property
    def arg_types(self) -> tuple[int, ...]:
        return ()

    @property
    def result_type(self) -> int:
        return 0


EMPTY_OP = EmptyOperation()


@dataclass(frozen=True)
class UnionOperation:
    left: int
    right: int
    kind = "union"

    @property
    def arg_types(self) -> tuple[int, ...]:
        return (self.left, self.right)

    @property
    def result_type(self) -> int:
        return self.left + self.right


class ExtensionOperation:
    """An extension operation: underlying graph plus docks and clonable nodes.

    Dock nodes are stored with the reserved :data:`~gxg.graph.UNLABELED`
    label, whatever label the caller supplied, because the argument graph's
    labels always win on fused docks.
    """

    kind = "extension"

    def __init__(
        self,
        labels: Mapping[NodeId, str | None],
        edges: Iterable[Edge],
        ports: Sequence[NodeId],
        docks: Sequence[NodeId],
        clonable: Iterable[NodeId] = (),
    ):
        self.docks = tuple(docks)
        for d in self.docks:
            if d not in labels:
                raise UnknownNode(f"dock {d!r} is not a node")
        lab = {v: (None if v in self.docks else l) for v, l in labels.items()}
        self.graph = new_graph(labels.keys(), lab, edges, ports, unlabeled=self.docks)
        self.clonable = frozenset(clonable)

    @property
    def ports(self) -> tuple[NodeId, ...]:
        return self.graph.ports

    @property
    def arg_types(self) -> tuple[int, ...]:
        return (len(self.docks),)

    @property
    def result_type(self) -> int:
        return len(self.graph.ports)

    @property
    def new_nodes(self) -> frozenset[NodeId]:
        """Ports that are not docks; the only nodes an application creates."""
        return frozenset(self.ports) - frozenset(self.docks)

    @property
    def context_nodes(self) -> frozenset[NodeId]:
        return frozenset(self.graph.nodes) - frozenset(self.ports) - frozenset(self.docks)

    @property
    def isolated_context_nodes(self) -> frozenset[NodeId]:
        return frozenset(u for u in self.context_nodes if not self.graph.in_edges(u) and not self.graph.out_edges(u))

    def label(self, u: NodeId) -> str:
        return self.graph.label(u)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExtensionOperation):
            return NotImplemented
        return (self.graph, self.docks, self.clonable) == (other.graph, other.docks, other.clonable)

    def __hash__(self) -> int:
        return hash((self.graph, self.docks, self.clonable))

    def __repr__(self) -> str:
        return (f"ExtensionOperation(nodes={len(self.graph)}, ports={list(self.ports)}, "
                f"docks={list(self.docks)}, clonable={sorted(self.clonable)})")


Operation = EmptyOperation | UnionOperation | ExtensionOperation


def validate_extension(phi: ExtensionOperation, path: str = "") -> list[Diagnostic]:
    """Every violated structural requirement of ``phi``; empty when valid."""
    out: list[Diagnostic] = []
    seen = set()
    for i, d in enumerate(phi.docks):
        if d in seen:
            out.append(Diagnostic("dock", f"dock {d!r} occurs twice", f"{path}/docks/{i}"))
        seen.add(d)
    ports, docks = set(phi.ports), set(phi.docks)
    for c in sorted(phi.clonable):
        if c not in phi.graph:
            out.append(Diagnostic("clonable", f"clonable node {c!r} is not a node", f"{path}/clonable"))
        elif c in ports or c in docks:
            out.append(Diagnostic("clonable", f"clonable node {c!r} is a port or dock", f"{path}/clonable"))
    new = phi.new_nodes
    for i, (s, l, t) in enumerate(phi.graph.sorted_edges()):
        if s not in new:
            out.append(Diagnostic("R1", f"edge {(s, l, t)!r} starts at {s!r}, which is not a new node",
                                  f"{path}/edges/{i}"))
    targets = {t for _, _, t in phi.graph.edges}
    for d in sorted(docks - ports):
        if d not in targets:
            out.append(Diagnostic("R2", f"dock {d!r} is not a port and has no incoming edge", f"{path}/docks"))
    return out


# -- cloning -------------------------------------------------------------------

def fresh_id(base: NodeId, taken) -> NodeId:
    """``<base>#<k>`` for the least ``k >= 1`` not in ``taken``."""
    root = base.split("#", 1)[0]
    k = 1
    while f"{root}#{k}" in taken:
        k += 1
    return f"{root}#{k}"


def _clone(G: Graph, C: Iterable[NodeId], mult: Mapping[NodeId, int]) -> tuple[Graph, dict[NodeId, tuple[NodeId, ...]]]:
    C = set(C)
    ports = set(G.ports)
    for v in sorted(C):
        if v not in G:
            raise CloneOfUnknownNode(f"cannot clone unknown node {v!r}")
        if v in ports:
            raise CloneOfPort(f"cannot clone port {v!r}")
    if set(mult) != C:
        raise ValueError("clone multiplicities must be given for exactly the cloned nodes")
    taken = set(G.nodes)
    copies: dict[NodeId, tuple[NodeId, ...]] = {}
    for v in G.nodes:
        if v in C:
            names = []
            for _ in range(mult[v]):
                n = fresh_id(v, taken)
                taken.add(n)
                names.append(n)
            copies[v] = tuple(names)
        else:
            copies[v] = (v,)
    labels = {c: G.label(v) for v, cs in copies.items() for c in cs}
    edges = [(a, l, b) for s, l, t in G.edges for a in copies[s] for b in copies[t]]
    return Graph(labels, edges, G.ports), copies


def clone_nodes(G: Graph, C: Iterable[NodeId], mult: Mapping[NodeId, int]) -> Graph:
    """Replace each ``v`` in ``C`` by ``mult[v]`` fresh copies carrying all incident edges."""
    return _clone(G, C, mult)[0]


# -- applying an extension ----------------------------------------------------------

@dataclass(frozen=True)
class ExtensionChoice:
    """The nondeterministic choices made when applying an extension operation.

    ``context`` maps each non-clonable context node to its target node,
    ``clones`` maps each clonable node to the targets of its copies (so its
    multiplicity is the tuple length) and ``new_nodes`` optionally fixes the
    ids given to the new nodes.
    """

    context: Mapping[NodeId, NodeId] = field(default_factory=dict)
    clones: Mapping[NodeId, tuple[NodeId, ...]] = field(default_factory=dict)
    new_nodes: Mapping[NodeId, NodeId] | None = None

    @property
    def clone_mult(self) -> dict[NodeId, int]:
        return {c: len(ts) for c, ts in self.clones.items()}

    def renamed(self, mapping: Mapping[NodeId, NodeId]) -> "ExtensionChoice":
        f = lambda v: mapping.get(v, v)  # noqa: E731
        return ExtensionChoice(
            {u: f(v) for u, v in self.context.items()},
            {c: tuple(f(v) for v in vs) for c, vs in self.clones.items()},
            None if self.new_nodes is None else {u: f(v) for u, v in self.new_nodes.items()},
        )

    def to_json(self) -> dict:
        out = {
            "context": dict(sorted(self.context.items())),
            "clones": {c: list(vs) for c, vs in sorted(self.clones.items())},
        }
        if self.new_nodes is not None:
            out["new_nodes"] = dict(sorted(self.new_nodes.items()))
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "ExtensionChoice":
        new = data.get("new_nodes")
        return cls(
            dict(data.get("context", {})),
            {c: tuple(vs) for c, vs in data.get("clones", {}).items()},
            None if new is None else dict(new),
        )


def _check_choice(phi: ExtensionOperation, G: Graph, choice: ExtensionChoice) -> None:
    noncl = phi.context_nodes - phi.clonable
    if set(choice.context) != noncl:
        raise BadChoice(f"context assignment must cover exactly {sorted(noncl)}, got {sorted(choice.context)}")
    extra = set(choice.clones) - phi.clonable
    if extra:
        raise BadChoice(f"clone targets given for non-clonable nodes {sorted(extra)}")
    ports = set(G.ports)
    used: set[NodeId] = set()
    pairs = list(choice.context.items()) + [(c, t) for c, ts in choice.clones.items() for t in ts]
    for u, t in pairs:
        if t not in G:
            raise BadChoice(f"context node {u!r} mapped to unknown node {t!r}")
        if t in ports:
            raise BadChoice(f"context node {u!r} mapped to port {t!r}")
        if t in used:
            raise BadChoice(f"node {t!r} is the target of two context nodes")
        if G.label(t) != phi.label(u):
            raise BadChoice(f"context node {u!r} ({phi.label(u)}) mapped to {t!r} ({G.label(t)})")
        used.add(t)
    if choice.new_nodes is not None:
        if set(choice.new_nodes) != phi.new_nodes:
            raise BadChoice(f"new-node ids must cover exactly {sorted(phi.new_nodes)}")
        vals = list(choice.new_nodes.values())
        if len(set(vals)) != len(vals) or any(v in G for v in vals):
            raise BadChoice("new-node ids must be distinct and absent from the argument graph")


def apply_extension(phi: ExtensionOperation, G: Graph, choice: ExtensionChoice) -> Graph:
    """Apply ``phi`` to ``G`` under the given choices; ``G``'s node ids are kept."""
    if G.type != len(phi.docks):
        raise TypeMismatch(f"extension expects type {len(phi.docks)}, argument has type {G.type}")
    _check_choice(phi, G, choice)
    mult = {c: len(choice.clones.get(c, ())) for c in phi.clonable}
    cloned, copies = _clone(phi.graph, phi.clonable, mult)

    mu: dict[NodeId, NodeId] = {}
    for d, v in zip(phi.docks, G.ports):
        mu[d] = v
    for u, t in choice.context.items():
        mu[u] = t
    for c in phi.clonable:
        for copy, t in zip(copies[c], choice.clones.get(c, ())):
            mu[copy] = t
    taken = set(G.nodes) | set(mu.values())
    for u in sorted(phi.new_nodes):
        if choice.new_nodes is not None:
            mu[u] = choice.new_nodes[u]
        else:
            mu[u] = fresh_id(u, taken)
            taken.add(mu[u])

    labels = {mu[v]: l for v, l in cloned.labels.items()}
    labels.update(G.labels)  # argument labels win on fused docks
    edges = set(G.edges)
    edges.update((mu[s], l, mu[t]) for s, l, t in cloned.edges)
    return Graph(labels, edges, [mu[u] for u in phi.ports])


def enumerate_choices(phi: ExtensionOperation, G: Graph, clone_bound: int | None = None) -> Iterator[ExtensionChoice]:
    """All valid choices for applying ``phi`` to ``G``, in a deterministic order.

    Copies of one clonable node are interchangeable, so each clonable node
    is assigned a *set* of targets of size at most ``clone_bound``
    (unbounded when ``None``).
    """
    if G.type != len(phi.docks):
        raise TypeMismatch(f"extension expects type {len(phi.docks)}, argument has type {G.type}")
    ports = set(G.ports)
    by_label: dict[str, list[NodeId]] = {}
    for v in G.nodes:
        if v not in ports:
            by_label.setdefault(G.label(v), []).append(v)
    noncl = sorted(phi.context_nodes - phi.clonable)
    clon = sorted(phi.clonable)
    groups = sorted({phi.label(u) for u in noncl} | {phi.label(u) for u in clon})

    def per_label(lab: str) -> list[tuple[dict, dict]]:
        cands = by_label.get(lab, [])
        need = [u for u in noncl if phi.label(u) == lab]
        cl = [u for u in clon if phi.label(u) == lab]
        out = []
        for perm in itertools.permutations(cands, len(need)):
            rest = [v for v in cands if v not in perm]
            for cl_assign in _clone_sets(cl, rest, clone_bound):
                out.append((dict(zip(need, perm)), cl_assign))
        return out

    options = [per_label(lab) for lab in groups]
    for combo in itertools.product(*options):
        ctx: dict[NodeId, NodeId] = {}
        clones: dict[NodeId, tuple[NodeId, ...]] = {c: () for c in clon}
        for c_part, k_part in combo:
            ctx.update(c_part)
            clones.update(k_part)
        yield ExtensionChoice(ctx, clones)


def _clone_sets(cl: list[NodeId], cands: list[NodeId], bound: int | None) -> Iterator[dict]:
    if not cl:
        yield {}
        return
    head, tail = cl[0], cl[1:]
    top = len(cands) if bound is None else min(bound, len(cands))
    for k in range(top + 1):
        for subset in itertools.combinations(cands, k):
            rest = [v for v in cands if v not in subset]
            for more in _clone_sets(tail, rest, bound):
                yield {head: subset, **more}


def extension_results(phi: ExtensionOperation, G: Graph, clone_bound: int | None = None) -> Iterator[tuple[Graph, ExtensionChoice]]:
    """Every ``(result, choice)`` pair, without deduplication."""
    for choice in enumerate_choices(phi, G, clone_bound):
        yield apply_extension(phi, G, choice), choice


def enumerate_extensions(phi: ExtensionOperation, G: Graph, clone_bound: int | None = None) -> list[Graph]:
    """The results of ``phi`` on ``G`` with clone multiplicities up to ``clone_bound``,
    deduplicated up to ported isomorphism."""
    seen = IsoSet()
    for H, _ in extension_results(phi, G, clone_bound):
        seen.add(H)
    return list(seen)


# -- union ---------------------------------------------------------------------------

def union_renaming(G1: Graph, G2: Graph) -> dict[NodeId, NodeId]:
    """Renaming of ``G2``'s nodes that makes it disjoint from ``G1``."""
    taken = set(G1.nodes) | set(G2.nodes)
    mapping = {}
    for v in G2.nodes:
        if v in G1:
            n = fresh_id(v, taken)
            taken.add(n)
            mapping[v] = n
    return mapping


def union(G1: Graph, G2: Graph) -> Graph:
    """Disjoint union; ``G2`` is renamed on collision, ports are concatenated."""
    if G1.is_empty():
        return G2
    renaming = union_renaming(G1, G2)
    H2 = G2.rename(renaming) if renaming else G2
    labels = dict(G1.labels)
    labels.update(H2.labels)
    return Graph(labels, G1.edges | H2.edges, G1.ports + H2.ports)


def apply_operation(op: Operation, args: Sequence[Graph], choice: ExtensionChoice | None = None) -> Graph:
    """Apply one operation deterministically (extensions need a choice)."""
    if isinstance(op, EmptyOperation):
        return EMPTY
    if isinstance(op, UnionOperation):
        G1, G2 = args
        if G1.type != op.left or G2.type != op.right:
            raise TypeMismatch(f"union expects types ({op.left}, {op.right}), got ({G1.type}, {G2.type})")
        return union(G1, G2)
    if choice is None:
        raise BadChoice("an extension needs an ExtensionChoice")
    return apply_extension(op, args[0], choice)
