"""Static conditions under which parsing runs faster than the general bound."""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import ExtensionOperation, UnionOperation
from .rtg import Grammar


def reduced_profile(phi: ExtensionOperation, u) -> frozenset[tuple[int, str]]:
    pos = {v: i for i, v in enumerate(phi.ports, 1)}
    return frozenset((pos[s], l) for l, s in phi.graph.in_edges(u) if s in pos)


def reduced_profiles(phi: ExtensionOperation) -> frozenset[frozenset]:
    ports = set(phi.ports)
    return frozenset(reduced_profile(phi, u) for u in phi.graph.nodes if u not in ports)


def docks_distinct_from_clonables(phi: ExtensionOperation) -> bool:
    fixed = [d for d in phi.docks if d not in set(phi.ports)]
    clon = {reduced_profile(phi, c) for c in phi.clonable}
    return all(reduced_profile(phi, d) not in clon for d in fixed)


def docks_distinct_from_all(phi: ExtensionOperation) -> bool:
    ports = set(phi.ports)
    others = [u for u in phi.graph.nodes if u not in ports]
    for d in phi.docks:
        if d in ports:
            continue
        pd = reduced_profile(phi, d)
        if any(u != d and reduced_profile(phi, u) == pd for u in others):
            return False
    return True


def _core_profiles(phi: ExtensionOperation) -> frozenset:
    # non-port, non-clonable nodes (ports excluded, see README)
    ports = set(phi.ports)
    return frozenset(reduced_profile(phi, u) for u in phi.graph.nodes if u not in ports and u not in phi.clonable)


def productions_separable(phi: ExtensionOperation, psi: ExtensionOperation) -> bool:
    return not (_core_profiles(phi) <= reduced_profiles(psi)) or not (_core_profiles(psi) <= reduced_profiles(phi))


@dataclass
class AnalysisReport:
    c: int
    exponent: int
    statement1: dict[str, bool] = field(default_factory=dict)
    condition_a: dict[str, bool] = field(default_factory=dict)
    condition_b: dict[str, bool] = field(default_factory=dict)
    condition_c: dict[str, bool] = field(default_factory=dict)
    conflicts_b: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def case1(self) -> bool:
        return all(self.statement1.values())

    @property
    def case2(self) -> bool:
        return all(self.condition_a.values()) and all(self.condition_b.values()) and all(self.condition_c.values())

    @property
    def classification(self) -> str:
        if self.case2:
            return "linear"
        if self.case1:
            return f"O(n^{self.c + 1})"
        return f"O(n^{self.exponent})"

    def to_json(self) -> dict:
        return {
            "c": self.c,
            "exponent": self.exponent,
            "theorem2_case1": self.case1,
            "theorem2_case2": self.case2,
            "classification": self.classification,
            "docks_vs_clonables": dict(sorted(self.statement1.items())),
            "docks_vs_non_ports": dict(sorted(self.condition_a.items())),
            "separable_extensions": dict(sorted(self.condition_b.items())),
            "union_alone": dict(sorted(self.condition_c.items())),
            "inseparable_pairs": [list(t) for t in self.conflicts_b],
        }


def analyze_grammar(g: Grammar) -> AnalysisReport:
    """Check the fast-parsing conditions on every extension used by ``g``."""
    c = g.max_type
    rep = AnalysisReport(c=c, exponent=2 * c + 1)
    used = sorted({p.op for p in g.productions if isinstance(g.operations[p.op], ExtensionOperation)})
    for name in used:
        phi = g.operations[name]
        rep.statement1[name] = docks_distinct_from_clonables(phi)
        rep.condition_a[name] = docks_distinct_from_all(phi)
    for A in g.nonterminals:
        prods = g.productions_of(A)
        ext = [p for p in prods if isinstance(g.operations[p.op], ExtensionOperation)]
        ok = True
        for i in range(len(ext)):
            for j in range(i + 1, len(ext)):
                if not productions_separable(g.operations[ext[i].op], g.operations[ext[j].op]):
                    ok = False
                    rep.conflicts_b.append((A, str(ext[i]), str(ext[j])))
        rep.condition_b[A] = ok
        has_union = any(isinstance(g.operations[p.op], UnionOperation) for p in prods)
        rep.condition_c[A] = not has_union or len(prods) == 1
    return rep
