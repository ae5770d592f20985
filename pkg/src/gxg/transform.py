"""Grammar preprocessing: productivity and the type-0 normal form.

A grammar is in normal form when every nonterminal of type 0 has the
single production ``A -> φ`` and no other production uses an operation of
result type 0.  Graphs of type 0 produced by a grammar can only ever be the
empty graph, which is what makes the rewrite language-preserving.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import EMPTY_OP, EmptyOperation, ExtensionOperation, UnionOperation
from .rtg import Grammar, Production


@dataclass
class NormalFormReport:
    removed_productions: list[Production] = field(default_factory=list)
    rewritten_nonterminals: set[str] = field(default_factory=set)
    productivity: dict[str, bool] = field(default_factory=dict)
    initial_productive: bool = True
    added_operations: list[str] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not (self.removed_productions or self.rewritten_nonterminals or self.added_operations)

    def to_json(self) -> dict:
        return {
            "removed_productions": [str(p) for p in self.removed_productions],
            "rewritten_nonterminals": sorted(self.rewritten_nonterminals),
            "productivity": dict(sorted(self.productivity.items())),
            "initial_productive": self.initial_productive,
            "added_operations": list(self.added_operations),
        }


def productive_nonterminals(g: Grammar) -> set[str]:
    """Least fixpoint of nonterminals having a production with productive arguments only."""
    prod: set[str] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs not in prod and all(B in prod for B in p.rhs):
                prod.add(p.lhs)
                changed = True
    return prod


def _empty_yielding(g: Grammar, alive: set[str]) -> set[str]:
    """Type-0 nonterminals among ``alive`` whose language actually contains φ.

    A type-0 extension has no ports and no docks, so all its nodes are
    isolated context nodes.  Applied to φ it succeeds only when each of them
    is clonable (and then cloned zero times).
    """
    ok: set[str] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs in ok or p.lhs not in alive or g.nonterminals[p.lhs] != 0:
                continue
            if not all(B in ok for B in p.rhs):
                continue
            op = g.operations[p.op]
            if isinstance(op, ExtensionOperation) and op.context_nodes - op.clonable:
                continue
            ok.add(p.lhs)
            changed = True
    return ok


def _empty_op_name(g: Grammar) -> tuple[str, bool]:
    for name, op in g.operations.items():
        if isinstance(op, EmptyOperation):
            return name, False
    name = "phi"
    k = 1
    while name in g.operations or name in g.nonterminals:
        k += 1
        name = f"phi{k}"
    return name, True


def normalize(g: Grammar) -> tuple[Grammar, NormalFormReport]:
    """Drop empty nonterminals and collapse type-0 nonterminals to ``A -> φ``.

    When the initial nonterminal generates nothing the returned grammar has
    no productions and ``report.initial_productive`` is False.
    """
    report = NormalFormReport()
    syntactic = productive_nonterminals(g)
    report.productivity = {A: A in syntactic for A in g.nonterminals}

    alive = set(syntactic)
    while True:
        zero_ok = _empty_yielding(g, alive)
        dead_zero = {A for A in alive if g.nonterminals[A] == 0 and A not in zero_ok}
        if not dead_zero:
            break
        alive -= dead_zero
        # anything that needed a removed nonterminal may have become empty too
        shrunk: set[str] = set()
        changed = True
        while changed:
            changed = False
            for p in g.productions:
                if p.lhs in alive and p.lhs not in shrunk and all(B in shrunk for B in p.rhs):
                    shrunk.add(p.lhs)
                    changed = True
        alive = shrunk
    for A in g.nonterminals:
        if A not in alive:
            report.productivity[A] = False

    phi_name, added = _empty_op_name(g)
    kept: list[Production] = []
    collapsed: set[str] = set()
    for p in g.productions:
        if p.lhs not in alive or any(B not in alive for B in p.rhs):
            report.removed_productions.append(p)
            continue
        if g.nonterminals[p.lhs] == 0:
            if isinstance(g.operations[p.op], EmptyOperation) and p.lhs not in collapsed:
                collapsed.add(p.lhs)
                kept.append(Production(p.lhs, phi_name))
            else:
                report.removed_productions.append(p)
                report.rewritten_nonterminals.add(p.lhs)
            continue
        kept.append(p)
    for A in sorted(alive):
        if g.nonterminals[A] == 0 and A not in collapsed:
            kept.append(Production(A, phi_name))
            collapsed.add(A)
            report.rewritten_nonterminals.add(A)
    need_phi = any(p.op == phi_name for p in kept)
    operations = dict(g.operations)
    if added and need_phi:
        operations[phi_name] = EMPTY_OP
        report.added_operations.append(phi_name)
    report.initial_productive = g.initial in alive
    return g.replace(operations=operations, productions=kept), report


def is_normalized(g: Grammar) -> bool:
    """Whether every type-0 nonterminal has exactly the production ``A -> φ``
    and no other operation of result type 0 is used."""
    for A, t in g.nonterminals.items():
        ps = g.productions_of(A)
        if t == 0 and ps and (len(ps) != 1 or not isinstance(g.operations[ps[0].op], EmptyOperation)):
            return False
    for p in g.productions:
        op = g.operations[p.op]
        if isinstance(op, (ExtensionOperation, UnionOperation)) and op.result_type == 0:
            return False
    return True
