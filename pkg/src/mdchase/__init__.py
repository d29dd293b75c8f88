"""Entity resolution under matching dependencies.

Parses matching dependencies (MDs) and conjunctive queries, classifies MD sets
by the syntactic hardness criteria for resolved query answering, and runs the
MD chase to compute minimally resolved instances and resolved answers.
"""

from mdchase.model import (
    Attr,
    Fresh,
    Instance,
    Position,
    Schema,
    StructuralError,
    active_domain,
    diff,
)
from mdchase.similarity import (
    EQUALITY,
    SimilarityError,
    SimilaritySpec,
    SimRegistry,
    levenshtein,
    sim_eval,
    validate_similarity,
)
from mdchase.language import (
    Atom,
    ConjunctiveQuery,
    MatchingDependency,
    MDSet,
    ParseError,
    QueryClass,
    SimAtom,
    changeable_attributes,
    classify_query,
    parse_md,
    parse_mds,
    parse_query,
    print_md,
)
from mdchase.analysis import (
    AnalysisError,
    Verdict,
    build_mdg,
    components,
    equivalent_sets,
    hardness_verdict,
    non_inclusive,
    structure_report,
)
from mdchase.chase import (
    ChaseNode,
    ForcedClass,
    ResolvedSet,
    enumerate_resolved,
    forced_classes,
    is_resolved,
    minimally_resolved,
    modifiable_positions,
    successors,
    validate_step,
)
from mdchase.query import AnswerSet, eval_cq, is_resolved_answer, resolved_answers

__version__ = "0.1.0"

__all__ = [
    "AnalysisError", "AnswerSet", "Atom", "Attr", "ChaseNode", "ConjunctiveQuery", "EQUALITY",
    "ForcedClass", "Fresh", "Instance", "MDSet", "MatchingDependency", "ParseError", "Position",
    "QueryClass", "ResolvedSet", "Schema", "SimAtom", "SimRegistry", "SimilarityError",
    "SimilaritySpec", "StructuralError", "Verdict", "active_domain", "build_mdg",
    "changeable_attributes", "classify_query", "components", "diff", "enumerate_resolved",
    "equivalent_sets", "eval_cq", "forced_classes", "hardness_verdict", "is_resolved",
    "is_resolved_answer", "levenshtein", "minimally_resolved", "modifiable_positions",
    "non_inclusive", "parse_md", "parse_mds", "parse_query", "print_md", "resolved_answers",
    "sim_eval", "structure_report", "successors", "validate_similarity", "validate_step",
]
