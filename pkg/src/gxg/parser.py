"""Memoised membership parsing for graph extension grammars.

``parse_rec(A, p)`` decides whether the subgraph of ``G`` reachable from
the node sequence ``p`` can be derived from ``A``.  Unions split ``p`` at
the fixed type boundary; extensions are inverted by guessing the dock
images ``d`` among nodes whose incoming-edge pattern from the new ports
matches the dock's, followed by a counting test over node profiles.

Reachability sets are precomputed once per graph as integer bitsets, so
each extension test only touches the out-edges of the new ports.
"""

from __future__ import annotations

import itertools
import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import networkx as nx

from .algebra import EmptyOperation, ExtensionChoice, ExtensionOperation, UnionOperation
from .errors import GrammarNotNormalized, NoWitnessStored
from .evaluator import ConcreteEvaluation, replay
from .graph import Graph, NodeId, reach, reachable
from .rtg import Address, Grammar, Production, Tree
from .transform import is_normalized

ReducedProfile = frozenset  # of (position, edge label), positions 1-based
Profile = tuple  # (ReducedProfile, node label)


# -- the per-operation index -------------------------------------------------------

@dataclass
class PhiProfileIndex:
    """Everything about an extension operation the matching test needs."""

    op: ExtensionOperation
    new_positions: tuple[int, ...]            # 1-based port positions holding new nodes
    dock_port_position: dict[int, int]        # dock index j -> port position i with dock_j = port_i
    reduced: dict[NodeId, ReducedProfile]     # incoming (position, label) pairs of every node
    port_profiles: tuple[ReducedProfile, ...]
    dock_profiles: tuple[ReducedProfile, ...]
    context_profiles: frozenset[Profile]      # profiles of non-isolated context nodes
    mult: dict[Profile, tuple[str, int]]      # ("=", m) or (">=", m)
    isolated_needed: Counter                  # label -> isolated non-clonable context nodes
    classes: dict[Profile, tuple[list[NodeId], list[NodeId]]]  # (non-clonable, clonable) per profile

    def profile(self, u: NodeId, dock_label: str | None = None) -> frozenset[tuple[int, str, str]]:
        """``profile_Φ(u)`` as triples; docks take the label of their image."""
        lab = dock_label if u in self.op.docks else self.op.label(u)
        return frozenset((i, l, lab) for i, l in self.reduced[u])

    def reduced_profiles(self) -> frozenset[ReducedProfile]:
        """Reduced profiles of all non-port nodes."""
        ports = set(self.op.ports)
        return frozenset(self.reduced[u] for u in self.op.graph.nodes if u not in ports)


def build_phi_index(phi: ExtensionOperation) -> PhiProfileIndex:
    ports = phi.ports
    pos = {u: i for i, u in enumerate(ports, 1)}
    new_positions = tuple(i for i, u in enumerate(ports, 1) if u in phi.new_nodes)
    reduced: dict[NodeId, set] = {u: set() for u in phi.graph.nodes}
    for s, l, t in phi.graph.edges:
        if s in pos:  # always true for a valid operation
            reduced[t].add((pos[s], l))
    red = {u: frozenset(v) for u, v in reduced.items()}
    dock_port = {j: pos[d] for j, d in enumerate(phi.docks, 1) if d in pos}
    classes: dict[Profile, tuple[list, list]] = {}
    isolated = Counter()
    for u in sorted(phi.context_nodes):
        if not red[u]:
            if u not in phi.clonable and not phi.graph.out_edges(u):
                isolated[phi.label(u)] += 1
            continue
        key = (red[u], phi.label(u))
        nc, cl = classes.setdefault(key, ([], []))
        (cl if u in phi.clonable else nc).append(u)
    mult = {k: ((">=" if cl else "="), len(nc)) for k, (nc, cl) in classes.items()}
    return PhiProfileIndex(
        op=phi,
        new_positions=new_positions,
        dock_port_position=dock_port,
        reduced=red,
        port_profiles=tuple(red[u] for u in ports),
        dock_profiles=tuple(red[d] for d in phi.docks),
        context_profiles=frozenset(classes),
        mult=mult,
        isolated_needed=isolated,
        classes=classes,
    )


# -- graph-side precomputation -------------------------------------------------------

class GraphIndex:
    """Node numbering, labels-as-bitsets and per-node reachability bitsets."""

    def __init__(self, G: Graph):
        self.graph = G
        self.nodes = G.nodes
        self.bit = {v: 1 << k for k, v in enumerate(self.nodes)}
        self.label_bits: dict[str, int] = {}
        for v in self.nodes:
            lab = G.label(v)
            self.label_bits[lab] = self.label_bits.get(lab, 0) | self.bit[v]
        self.reach_bits = self._reach_bits(G)

    def _reach_bits(self, G: Graph) -> dict[NodeId, int]:
        dg = nx.DiGraph()
        dg.add_nodes_from(G.nodes)
        dg.add_edges_from((s, t) for s, _, t in G.edges)
        cond = nx.condensation(dg)
        members = cond.graph["mapping"]
        comp_bits = {c: 0 for c in cond.nodes}
        for v, c in members.items():
            comp_bits[c] |= self.bit[v]
        for c in reversed(list(nx.topological_sort(cond))):
            acc = comp_bits[c]
            for succ in cond.successors(c):
                acc |= comp_bits[succ]
            comp_bits[c] = acc
        return {v: comp_bits[members[v]] for v in G.nodes}

    def reach_of(self, seq: Sequence[NodeId]) -> int:
        acc = 0
        for v in seq:
            acc |= self.reach_bits[v]
        return acc

    def bits_of(self, seq) -> int:
        acc = 0
        for v in seq:
            acc |= self.bit[v]
        return acc

    def smallest_with_label(self, mask: int, label: str, count: int) -> list[NodeId]:
        m = mask & self.label_bits.get(label, 0)
        out = []
        while m and len(out) < count:
            low = m & -m
            out.append(self.nodes[low.bit_length() - 1])
            m ^= low
        return out


# -- local view of an extension query ---------------------------------------------------

@dataclass
class _Local:
    """E_p and V_p for a port sequence ``p`` and an extension operation."""

    new_nodes: tuple[NodeId, ...]
    new_bits: int
    targets: dict[NodeId, set]   # y -> reduced profile (position, label) from new positions
    vp_bits: int


def _local(ix: PhiProfileIndex, gi: GraphIndex, p: Sequence[NodeId]) -> _Local | None:
    G = gi.graph
    phi = ix.op
    new_nodes = []
    targets: dict[NodeId, set] = {}
    for i in ix.new_positions:
        v = p[i - 1]
        if G.label(v) != phi.label(phi.ports[i - 1]):
            return None
        new_nodes.append(v)
        for l, t in G.out_edges(v):
            targets.setdefault(t, set()).add((i, l))
    vp = gi.bits_of(p) | gi.bits_of(targets)
    return _Local(tuple(new_nodes), gi.bits_of(new_nodes), targets, vp)


def _ports_ok(ix: PhiProfileIndex, loc: _Local, p: Sequence[NodeId]) -> bool:
    for i, v in enumerate(p, 1):
        if frozenset(loc.targets.get(v, ())) != ix.port_profiles[i - 1]:
            return False
    return True


def _dock_candidates(ix: PhiProfileIndex, loc: _Local, p: Sequence[NodeId]) -> list[list[NodeId]] | None:
    """Candidate images per dock, or ``None`` when some dock has none."""
    pset = set(p)
    per_dock = []
    for j, want in enumerate(ix.dock_profiles, 1):
        if j in ix.dock_port_position:
            per_dock.append([p[ix.dock_port_position[j] - 1]])
            continue
        cands = sorted(y for y, prof in loc.targets.items() if y not in pset and frozenset(prof) == want)
        if not cands:
            return None
        per_dock.append(cands)
    return per_dock


def _dock_sequences(per_dock: list[list[NodeId]] | None) -> Iterator[tuple[NodeId, ...]]:
    if per_dock is None:
        return
    if not per_dock:
        yield ()
        return
    for combo in itertools.product(*per_dock):
        if len(set(combo)) == len(combo):
            yield combo


@dataclass
class _Match:
    d: tuple[NodeId, ...]
    choice: ExtensionChoice


def _check(ix: PhiProfileIndex, gi: GraphIndex, loc: _Local, p: Sequence[NodeId],
           d: Sequence[NodeId], build: bool) -> _Match | None | bool:
    """The matching test for a fixed dock sequence; builds the choice on request."""
    G = gi.graph
    rd = gi.reach_of(d)
    if rd & loc.new_bits:
        return None
    dset = set(d)
    pset = set(p)
    # the remaining nodes of V_p must be context images inside the argument
    groups: dict[Profile, list[NodeId]] = {}
    for y, prof in loc.targets.items():
        if y in pset or y in dset:
            continue
        if not (rd >> (gi.bit[y].bit_length() - 1)) & 1:
            return None
        key = (frozenset(prof), G.label(y))
        if key not in ix.mult:
            return None
        groups.setdefault(key, []).append(y)
    for key, (rel, m) in ix.mult.items():
        n = len(groups.get(key, ()))
        if n < m or (rel == "=" and n != m):
            return None
    outside = rd & ~loc.vp_bits
    for lab, need in ix.isolated_needed.items():
        if (outside & gi.label_bits.get(lab, 0)).bit_count() < need:
            return None
    if not build:
        return True
    context: dict[NodeId, NodeId] = {}
    clones: dict[NodeId, tuple[NodeId, ...]] = {c: () for c in sorted(ix.op.clonable)}
    for key, (nc, cl) in ix.classes.items():
        ys = sorted(groups.get(key, ()))
        for u, y in zip(nc, ys):
            context[u] = y
        rest = ys[len(nc):]
        if rest:
            clones[cl[0]] = tuple(rest)
    phi = ix.op
    for lab in sorted(ix.isolated_needed):
        iso = [u for u in sorted(phi.context_nodes - phi.clonable)
               if phi.label(u) == lab and not ix.reduced[u] and not phi.graph.out_edges(u)]
        for u, y in zip(iso, gi.smallest_with_label(outside, lab, len(iso))):
            context[u] = y
    new = {phi.ports[i - 1]: p[i - 1] for i in ix.new_positions}
    return _Match(tuple(d), ExtensionChoice(context, clones, new))


# -- public matching helpers --------------------------------------------------------------

def candidate_dock_sequences(phi: ExtensionOperation, G: Graph, p: Sequence[NodeId],
                             index: PhiProfileIndex | None = None,
                             graph_index: GraphIndex | None = None) -> list[tuple[NodeId, ...]]:
    """Dock image sequences whose incoming-edge patterns agree with the docks'."""
    ix = index or build_phi_index(phi)
    gi = graph_index or GraphIndex(G)
    if len(p) != len(phi.ports):
        return []
    loc = _local(ix, gi, p)
    if loc is None:
        return []
    return list(_dock_sequences(_dock_candidates(ix, loc, p)))


def matching_exists(phi: ExtensionOperation, G: Graph, p: Sequence[NodeId], d: Sequence[NodeId],
                    index: PhiProfileIndex | None = None, graph_index: GraphIndex | None = None) -> bool:
    """Whether ``reach(G, p)`` is obtained by applying ``phi`` to ``reach(G, d)``,
    with the new nodes of the result placed at ``p``."""
    ix = index or build_phi_index(phi)
    gi = graph_index or GraphIndex(G)
    if len(p) != len(phi.ports) or len(d) != len(phi.docks) or len(set(d)) != len(d) or len(set(p)) != len(p):
        return False
    loc = _local(ix, gi, p)
    if loc is None or not _ports_ok(ix, loc, p):
        return False
    pset = set(p)
    for j, y in enumerate(d, 1):
        if j in ix.dock_port_position:
            if y != p[ix.dock_port_position[j] - 1]:
                return False
        elif y in pset or frozenset(loc.targets.get(y, ())) != ix.dock_profiles[j - 1]:
            return False
    return bool(_check(ix, gi, loc, p, d, build=False))


def brute_force_matching(phi: ExtensionOperation, G: Graph, p: Sequence[NodeId], d: Sequence[NodeId]) -> bool:
    """Exhaustive search for a matching ``m: V_p -> V_Φ``.

    ``m`` must send ``p`` and ``d`` to the ports and docks positionally,
    preserve labels (docks excepted), give each non-clonable non-isolated
    node exactly one preimage, and preserve edges from new ports in both
    directions.  Additionally the new ports must lie outside the argument
    ``reach(G, d)``, context images inside it, and enough spare nodes must
    remain there for the isolated context nodes.
    """
    if len(p) != len(phi.ports) or len(d) != len(phi.docks) or len(set(d)) != len(d) or len(set(p)) != len(p):
        return False
    new_pos = [i for i, u in enumerate(phi.ports) if u in phi.new_nodes]
    new_src = {p[i] for i in new_pos}
    E_p = {(s, l, t) for s, l, t in G.edges if s in new_src}
    V_p = list(dict.fromkeys(list(p) + sorted(t for _, _, t in E_p)))
    arg = reachable(G, d)
    if new_src & arg:
        return False
    for y in d:
        if y not in V_p:
            return False
    fixed: dict[NodeId, NodeId] = {}
    for v, u in zip(p, phi.ports):
        fixed[v] = u
    for v, u in zip(d, phi.docks):
        if fixed.get(v, u) != u:
            return False
        fixed[v] = u
    if len(set(fixed.values())) != len(fixed):
        return False
    isolated = {u for u in phi.context_nodes if not phi.graph.in_edges(u) and not phi.graph.out_edges(u)}
    targets = sorted(u for u in phi.context_nodes if u not in isolated)
    free = [v for v in V_p if v not in fixed]
    if any(v not in arg for v in free):
        return False
    lab = {u: phi.label(u) for u in phi.graph.nodes}
    for v, u in fixed.items():
        if u not in phi.docks and lab[u] != G.label(v):
            return False
    pos_new = {p[i]: phi.ports[i] for i in new_pos}
    phi_edges = phi.graph.edges

    def edges_ok(m: Mapping[NodeId, NodeId]) -> bool:
        for s, l, t in E_p:
            if (m[s], l, m[t]) not in phi_edges:
                return False
        for s, l, t in phi_edges:
            if s not in phi.new_nodes:
                return False
        # every edge of Φ from a new port must appear for every preimage of its target
        pre: dict[NodeId, list[NodeId]] = {}
        for v, u in m.items():
            pre.setdefault(u, []).append(v)
        for s, l, t in phi_edges:
            src = [v for v in pre.get(s, ()) if v in pos_new]
            for a in src:
                for b in pre.get(t, ()):
                    if (a, l, b) not in E_p:
                        return False
        return True

    spare = arg - set(V_p)
    need = Counter(lab[u] for u in isolated if u not in phi.clonable)
    have = Counter(G.label(v) for v in spare)
    if any(have[l] < n for l, n in need.items()):
        return False

    for combo in itertools.product(targets, repeat=len(free)):
        m = dict(fixed)
        m.update(zip(free, combo))
        counts = Counter(combo)
        if any(counts[u] != 1 for u in targets if u not in phi.clonable):
            continue
        if any(lab[u] != G.label(v) for v, u in zip(free, combo)):
            continue
        if edges_ok(m):
            return True
    return False


def semantic_extension_check(phi: ExtensionOperation, G: Graph, p: Sequence[NodeId], d: Sequence[NodeId]) -> bool:
    """Ground truth: does some application of ``phi`` to ``reach(G, d)`` give ``reach(G, p)``?"""
    from .algebra import enumerate_choices, apply_extension

    if len(p) != len(phi.ports) or len(d) != len(phi.docks) or len(set(d)) != len(d) or len(set(p)) != len(p):
        return False
    try:
        arg = reach(G, d)
        target = reach(G, p)
    except Exception:
        return False
    new = {u: v for u, v in zip(phi.ports, p) if u in phi.new_nodes}
    if any(v in arg for v in new.values()):
        return False
    for choice in enumerate_choices(phi, arg, None):
        H = apply_extension(phi, arg, ExtensionChoice(choice.context, choice.clones, new))
        if H == target:
            return True
    return False


# -- the parser ---------------------------------------------------------------------------

@dataclass
class Certificate:
    production: Production
    ports: tuple[NodeId, ...]
    split: tuple[tuple[NodeId, ...], tuple[NodeId, ...]] | None = None
    docks: tuple[NodeId, ...] | None = None
    choice: ExtensionChoice | None = None


@dataclass
class ParseResult:
    member: bool
    witness: "Witness | None" = None
    stats: dict = field(default_factory=dict)

    def to_json(self, with_witness: bool = True) -> dict:
        out: dict = {"member": self.member}
        if with_witness and self.witness is not None:
            out["witness"] = self.witness.to_json()
        out["stats"] = dict(self.stats)
        return out


@dataclass
class Witness:
    tree: Tree
    choices: dict[Address, ExtensionChoice]
    nonterminals: dict[Address, str]
    ports: dict[Address, tuple[NodeId, ...]]
    docks: dict[Address, tuple[NodeId, ...]]

    def to_json(self) -> dict:
        def node(t: Tree, a: Address) -> dict:
            out = {"op": t.op, "nonterminal": self.nonterminals[a], "ports": list(self.ports[a])}
            if a in self.choices:
                out["docks"] = list(self.docks[a])
                out["choice"] = self.choices[a].to_json()
            out["children"] = [node(c, a + (i,)) for i, c in enumerate(t.children, 1)]
            return out
        return node(self.tree, ())

    @classmethod
    def from_json(cls, data: Mapping) -> "Witness":
        choices, nts, ports, docks = {}, {}, {}, {}

        def rec(n: Mapping, a: Address) -> Tree:
            nts[a] = n.get("nonterminal", "")
            ports[a] = tuple(n.get("ports", ()))
            if "choice" in n:
                choices[a] = ExtensionChoice.from_json(n["choice"])
                docks[a] = tuple(n.get("docks", ()))
            kids = tuple(rec(c, a + (i,)) for i, c in enumerate(n.get("children", ()), 1))
            return Tree(n["op"], kids)

        tree = rec(data, ())
        return cls(tree, choices, nts, ports, docks)


def nonshrinking_cycle(g: Grammar) -> bool:
    """Whether some derivation cycle can revisit a nonterminal on the same node set.

    Only extensions without new nodes and unions with a type-0 side keep
    the node set unchanged; any cycle through them needs iteration to a
    fixpoint.
    """
    dg = nx.DiGraph()
    dg.add_nodes_from(g.nonterminals)
    for p in g.productions:
        op = g.operations[p.op]
        if isinstance(op, ExtensionOperation) and not op.new_nodes:
            dg.add_edge(p.lhs, p.rhs[0])
        elif isinstance(op, UnionOperation):
            if op.right == 0:
                dg.add_edge(p.lhs, p.rhs[0])
            if op.left == 0:
                dg.add_edge(p.lhs, p.rhs[1])
    return not nx.is_directed_acyclic_graph(dg)


class Parser:
    """One parse of one graph; holds the memo table and statistics."""

    def __init__(self, g: Grammar, G: Graph, fixpoint: bool | None = None, check_normal: bool = True):
        if check_normal and not is_normalized(g):
            raise GrammarNotNormalized("normalize the grammar before parsing")
        self.grammar = g
        self.graph = G
        self.gi = GraphIndex(G)
        self.index = {name: build_phi_index(op) for name, op in g.operations.items()
                      if isinstance(op, ExtensionOperation)}
        self.fixpoint = nonshrinking_cycle(g) if fixpoint is None else fixpoint
        self.memo: dict[tuple[str, tuple[NodeId, ...]], Certificate | bool] = {}
        self.calls = 0
        self.candidates_tested = 0
        self.passes = 0

    def parse_rec(self, A: str, p: tuple[NodeId, ...]) -> bool:
        self.calls += 1
        key = (A, p)
        hit = self.memo.get(key)
        if hit is not None:
            return hit is not False
        g = self.grammar
        if g.nonterminals[A] == 0:
            for prod in g.productions_of(A):
                if isinstance(g.operations[prod.op], EmptyOperation):
                    self.memo[key] = Certificate(prod, p)
                    return True
            self.memo[key] = False
            return False
        self.memo[key] = False
        for prod in g.productions_of(A):
            cert = self._try(prod, p)
            if cert is not None:
                self.memo[key] = cert
                return True
        return False

    def _try(self, prod: Production, p: tuple[NodeId, ...]) -> Certificate | None:
        op = self.grammar.operations[prod.op]
        if isinstance(op, EmptyOperation):
            return None
        if isinstance(op, UnionOperation):
            p1, p2 = p[:op.left], p[op.left:]
            if self.gi.reach_of(p1) & self.gi.reach_of(p2):
                return None
            if self.parse_rec(prod.rhs[0], p1) and self.parse_rec(prod.rhs[1], p2):
                return Certificate(prod, p, split=(p1, p2))
            return None
        ix = self.index[prod.op]
        loc = _local(ix, self.gi, p)
        if loc is None or not _ports_ok(ix, loc, p):
            return None
        for d in _dock_sequences(_dock_candidates(ix, loc, p)):
            self.candidates_tested += 1
            if _check(ix, self.gi, loc, p, d, build=False) and self.parse_rec(prod.rhs[0], tuple(d)):
                m = _check(ix, self.gi, loc, p, d, build=True)
                return Certificate(prod, p, docks=m.d, choice=m.choice)
        return None

    def run(self) -> bool:
        g, G = self.grammar, self.graph
        if g.initial not in g.nonterminals or G.type != g.nonterminals[g.initial]:
            return False
        if self.gi.reach_of(G.ports) != (1 << len(G)) - 1:
            return False
        limit = max(sys.getrecursionlimit(), 10_000 + 20 * len(G))
        sys.setrecursionlimit(limit)
        top = (g.initial, tuple(G.ports))
        if not self.fixpoint:
            self.passes = 1
            return self.parse_rec(*top)
        known: dict = {}
        while True:
            self.passes += 1
            self.memo = dict(known)
            ok = self.parse_rec(*top)
            now = {k: v for k, v in self.memo.items() if v is not False}
            if ok or len(now) == len(known):
                return ok
            known = now

    def witness(self) -> Witness:
        g = self.grammar
        choices: dict[Address, ExtensionChoice] = {}
        nts: dict[Address, str] = {}
        ports: dict[Address, tuple] = {}
        docks: dict[Address, tuple] = {}

        def rec(A: str, p: tuple, a: Address) -> Tree:
            cert = self.memo.get((A, p))
            if not isinstance(cert, Certificate):
                raise NoWitnessStored(f"no certificate for {A} at {p!r}")
            nts[a] = A
            ports[a] = p
            prod = cert.production
            if cert.split is not None:
                kids = (rec(prod.rhs[0], cert.split[0], a + (1,)), rec(prod.rhs[1], cert.split[1], a + (2,)))
            elif cert.docks is not None:
                choices[a] = cert.choice
                docks[a] = cert.docks
                kids = (rec(prod.rhs[0], cert.docks, a + (1,)),)
            else:
                kids = ()
            return Tree(prod.op, kids)

        tree = rec(g.initial, tuple(self.graph.ports), ())
        return Witness(tree, choices, nts, ports, docks)

    def stats(self) -> dict:
        return {
            "memo_entries": len(self.memo),
            "candidates_tested": self.candidates_tested,
            "calls": self.calls,
            "passes": self.passes,
            "fixpoint": self.fixpoint,
        }


def parse(g: Grammar, G: Graph, fixpoint: bool | None = None) -> ParseResult:
    """Decide ``G ∈ L(g)``; on success also return a replayable witness."""
    P = Parser(g, G, fixpoint)
    ok = P.run()
    return ParseResult(ok, P.witness() if ok else None, P.stats())


def extract_witness(parser: Parser) -> Witness:
    return parser.witness()


def replay_witness(g: Grammar, w: Witness) -> Graph:
    return replay(g, w.tree, w.choices)


def witness_evaluation(g: Grammar, w: Witness) -> ConcreteEvaluation:
    """The concrete evaluation described by a witness, graph at every address."""
    graphs: dict[Address, Graph] = {}

    def rec(t: Tree, a: Address) -> Graph:
        sub = {b[len(a):]: c for b, c in w.choices.items() if b[:len(a)] == a}
        G = replay(g, t, sub)
        graphs[a] = G
        for i, c in enumerate(t.children, 1):
            rec(c, a + (i,))
        return G

    rec(w.tree, ())
    return ConcreteEvaluation(w.tree, graphs, dict(w.choices), dict(w.nonterminals))
