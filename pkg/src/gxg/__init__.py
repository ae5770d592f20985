"""Graph extension grammars: evaluation, normal form, analysis and parsing."""

from .algebra import (
    EMPTY_OP,
    Diagnostic,
    EmptyOperation,
    ExtensionChoice,
    ExtensionOperation,
    UnionOperation,
    apply_extension,
    clone_nodes,
    enumerate_choices,
    enumerate_extensions,
    union,
    validate_extension,
)
from .analysis import AnalysisReport, analyze_grammar
from .evaluator import (
    ConcreteEvaluation,
    SizeBoundedLanguage,
    brute_membership,
    evaluate,
    language_slice,
    replay,
    sample_evaluation,
    sample_graph,
)
from .graph import EMPTY, Graph, IsoSet, fingerprint, iso_equal, new_graph, node_profile, ported_isomorphic, reach
from .parser import (
    Parser,
    ParseResult,
    build_phi_index,
    candidate_dock_sequences,
    extract_witness,
    matching_exists,
    parse,
    replay_witness,
)
from .rtg import Grammar, Production, Tree, derive_sample, enumerate_trees, subtree_at, validate_grammar
from .transform import NormalFormReport, is_normalized, normalize, productive_nonterminals

__all__ = [name for name in dir() if not name.startswith("_")]
