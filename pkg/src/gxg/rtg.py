"""Typed regular tree grammars whose terminals name algebra operations."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

from .algebra import Diagnostic, ExtensionOperation, Operation, UnionOperation, validate_extension
from .errors import InvalidAddress, NoTreeWithinDepth
from .graph import UNLABELED

Address = tuple[int, ...]


@dataclass(frozen=True)
class Tree:
    op: str
    children: tuple["Tree", ...] = ()

    @cached_property
    def depth(self) -> int:
        return 1 + max((c.depth for c in self.children), default=0)

    @cached_property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    def __str__(self) -> str:
        if not self.children:
            return self.op
        return f"{self.op}[{', '.join(map(str, self.children))}]"

    def to_json(self):
        return {"op": self.op, "children": [c.to_json() for c in self.children]}

    @classmethod
    def from_json(cls, data) -> "Tree":
        return cls(data["op"], tuple(cls.from_json(c) for c in data.get("children", ())))


def subtree_at(t: Tree, address: Sequence[int]) -> Tree:
    """``t/α``: follow the 1-based child indices of ``address`` from the root."""
    cur = t
    for k, i in enumerate(address):
        if not isinstance(i, int) or not 1 <= i <= len(cur.children):
            raise InvalidAddress(f"address {tuple(address)!r} is not in the tree (step {k + 1})")
        cur = cur.children[i - 1]
    return cur


def addresses(t: Tree) -> Iterator[Address]:
    """All addresses of ``t`` in pre-order."""
    stack: list[tuple[Address, Tree]] = [((), t)]
    while stack:
        a, s = stack.pop()
        yield a
        for i in range(len(s.children), 0, -1):
            stack.append((a + (i,), s.children[i - 1]))


@dataclass(frozen=True)
class Production:
    lhs: str
    op: str
    rhs: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.rhs:
            return f"{self.lhs} -> {self.op}"
        return f"{self.lhs} -> {self.op}[{', '.join(self.rhs)}]"


@dataclass
class Grammar:
    """A typed regular tree grammar together with the operations it names.

    ``nonterminals`` maps each nonterminal to its type.  Production order is
    preserved and acts as the tie-break order throughout the package.
    """

    nonterminals: dict[str, int]
    operations: dict[str, Operation]
    productions: list[Production]
    initial: str
    node_labels: tuple[str, ...] | None = None
    edge_labels: tuple[str, ...] | None = None
    _by_lhs: dict[str, list[Production]] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.productions = list(self.productions)
        for p in self.productions:
            self._by_lhs.setdefault(p.lhs, []).append(p)

    def productions_of(self, A: str) -> list[Production]:
        return self._by_lhs.get(A, [])

    def type_of(self, A: str) -> int:
        return self.nonterminals[A]

    @property
    def max_type(self) -> int:
        return max(self.nonterminals.values(), default=0)

    def op(self, name: str) -> Operation:
        return self.operations[name]

    def replace(self, **changes) -> "Grammar":
        kw = dict(nonterminals=self.nonterminals, operations=self.operations, productions=self.productions,
                  initial=self.initial, node_labels=self.node_labels, edge_labels=self.edge_labels)
        kw.update(changes)
        return Grammar(**kw)


def validate_grammar(g: Grammar) -> list[Diagnostic]:
    """Every typing, referential and operation-level problem of ``g``."""
    out: list[Diagnostic] = []
    clash = set(g.nonterminals) & set(g.operations)
    for name in sorted(clash):
        out.append(Diagnostic("names", f"{name!r} is both a nonterminal and an operation", "/nonterminals"))
    if g.initial not in g.nonterminals:
        out.append(Diagnostic("initial", f"initial nonterminal {g.initial!r} is not declared", "/initial"))
    for A, t in g.nonterminals.items():
        if not isinstance(t, int) or t < 0:
            out.append(Diagnostic("type", f"nonterminal {A!r} has invalid type {t!r}", f"/nonterminals/{A}"))
    for name, op in g.operations.items():
        path = f"/operations/{name}"
        if isinstance(op, ExtensionOperation):
            out.extend(validate_extension(op, path))
            out.extend(_check_alphabets(g, op, path))
        elif isinstance(op, UnionOperation):
            if op.left < 0 or op.right < 0:
                out.append(Diagnostic("type", "union types must be nonnegative", path))
    for i, p in enumerate(g.productions):
        path = f"/productions/{i}"
        if p.lhs not in g.nonterminals:
            out.append(Diagnostic("reference", f"{p}: unknown nonterminal {p.lhs!r}", f"{path}/lhs"))
        if p.op not in g.operations:
            out.append(Diagnostic("reference", f"{p}: unknown operation {p.op!r}", f"{path}/op"))
            continue
        op = g.operations[p.op]
        for j, B in enumerate(p.rhs):
            if B not in g.nonterminals:
                out.append(Diagnostic("reference", f"{p}: unknown nonterminal {B!r}", f"{path}/rhs/{j}"))
        if len(p.rhs) != len(op.arg_types):
            out.append(Diagnostic("arity", f"{p}: {p.op} takes {len(op.arg_types)} arguments, got {len(p.rhs)}",
                                  f"{path}/rhs"))
            continue
        if p.lhs in g.nonterminals and g.nonterminals[p.lhs] != op.result_type:
            out.append(Diagnostic("type", f"{p}: {p.op} has result type {op.result_type}, "
                                          f"{p.lhs} has type {g.nonterminals[p.lhs]}", f"{path}/lhs"))
        for j, (B, want) in enumerate(zip(p.rhs, op.arg_types)):
            if B in g.nonterminals and g.nonterminals[B] != want:
                out.append(Diagnostic("type", f"{p}: argument {j + 1} of {p.op} needs type {want}, "
                                              f"{B} has type {g.nonterminals[B]}", f"{path}/rhs/{j}"))
    return out


def _check_alphabets(g: Grammar, op: ExtensionOperation, path: str) -> list[Diagnostic]:
    out = []
    if g.node_labels is not None:
        allowed = set(g.node_labels)
        for v in op.graph.nodes:
            lab = op.graph.label(v)
            if lab != UNLABELED and lab not in allowed:
                out.append(Diagnostic("alphabet", f"node label {lab!r} of {v!r} is not declared", f"{path}/nodes"))
    if g.edge_labels is not None:
        allowed = set(g.edge_labels)
        for s, l, t in op.graph.sorted_edges():
            if l not in allowed:
                out.append(Diagnostic("alphabet", f"edge label {l!r} is not declared", f"{path}/edges"))
    return out


# -- typing and language membership for trees -----------------------------------

def tree_type(g: Grammar, t: Tree) -> int | None:
    """The type of ``t`` under the grammar's signature, or ``None`` if ill-typed."""
    op = g.operations.get(t.op)
    if op is None or len(t.children) != len(op.arg_types):
        return None
    for c, want in zip(t.children, op.arg_types):
        if tree_type(g, c) != want:
            return None
    return op.result_type


def in_tree_language(g: Grammar, A: str, t: Tree) -> bool:
    """Whether ``t`` is derivable from ``A``."""
    memo: dict[tuple[str, int], bool] = {}

    def rec(B: str, s: Tree) -> bool:
        key = (B, id(s))
        if key not in memo:
            memo[key] = any(
                p.op == s.op and len(p.rhs) == len(s.children)
                and all(rec(C, c) for C, c in zip(p.rhs, s.children))
                for p in g.productions_of(B)
            )
        return memo[key]

    return rec(A, t)


def min_heights(g: Grammar) -> dict[str, int]:
    """Least tree depth derivable from each nonterminal (absent when empty)."""
    h: dict[str, int] = {}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if all(B in h for B in p.rhs):
                d = 1 + max((h[B] for B in p.rhs), default=0)
                if d < h.get(p.lhs, d + 1):
                    h[p.lhs] = d
                    changed = True
    return h


def enumerate_trees(g: Grammar, A: str, depth_bound: int) -> Iterator[Tree]:
    """All trees of ``L_A(g)`` with depth at most ``depth_bound``.

    Trees are produced by increasing depth, then production order, then the
    order of the argument combinations.  Lower layers are materialised as
    needed; the topmost layer of ``A`` is streamed.
    """
    if depth_bound < 1:
        return
    # layers[B][d] = trees of depth exactly d+1 derivable from B
    layers: dict[str, list[list[Tree]]] = {B: [] for B in g.nonterminals}

    def layer(B: str, d: int) -> Iterator[Tree]:
        seen: set[Tree] = set()
        for p in g.productions_of(B):
            if not p.rhs:
                if d == 1 and Tree(p.op) not in seen:
                    seen.add(Tree(p.op))
                    yield Tree(p.op)
                continue
            if d == 1:
                continue
            # at least one child has depth exactly d-1
            k = len(p.rhs)
            for exact in range(k):
                pools = []
                for j, C in enumerate(p.rhs):
                    below = upto_depth(C, d - 2)
                    if j < exact:
                        pools.append(below)
                    elif j == exact:
                        pools.append(layers[C][d - 2])
                    else:
                        pools.append(below + layers[C][d - 2])
                for kids in itertools.product(*pools):
                    t = Tree(p.op, tuple(kids))
                    if t not in seen:
                        seen.add(t)
                        yield t

    def upto_depth(C: str, n: int) -> list[Tree]:
        # trees of C with depth <= n (n counts layers)
        return [t for lay in layers[C][:n] for t in lay]

    for d in range(1, depth_bound + 1):
        if d < depth_bound:
            for B in g.nonterminals:
                layers[B].append(list(layer(B, d)))
            yield from layers[A][d - 1]
        else:
            yield from layer(A, d)


def derive_sample(g: Grammar, A: str, depth_bound: int, seed: int | None = 0) -> Tree:
    """A pseudo-random tree of ``L_A(g)`` of depth at most ``depth_bound``.

    Productions are chosen uniformly among those that can still finish
    within the remaining depth, so the walk never reaches a dead end.
    """
    h = min_heights(g)
    if A not in h or h[A] > depth_bound:
        raise NoTreeWithinDepth(f"no tree of depth <= {depth_bound} derivable from {A!r}")
    rng = random.Random(seed)

    def grow(B: str, budget: int) -> Tree:
        options = [p for p in g.productions_of(B)
                   if all(C in h for C in p.rhs) and 1 + max((h[C] for C in p.rhs), default=0) <= budget]
        p = rng.choice(options)
        return Tree(p.op, tuple(grow(C, budget - 1) for C in p.rhs))

    return grow(A, depth_bound)
