"""Knowledge compilation of constraint languages into d-DNNF circuits, with probabilistic queries.

Typical use::

    from nesykc import three_path_theory, ProbabilityVector, compile_theory, pqe
    t = three_path_theory()
    c = compile_theory(t)
    pqe(c, ProbabilityVector.uniform(t.vars))
"""

from ._backend import get_backend, set_backend, use_backend
from .circuit import (
    Circuit,
    CircuitBuilder,
    StructureReport,
    check_structure,
    condition,
    emit,
    evaluate,
    parse,
    smooth,
    trim,
)
from .compile_card import compile_card
from .compile_hier import compile_te_hier, compile_tree_hier, emit_hex_2horn
from .compile_path import compile_aspath, normalize_graph, topo_edge_order
from .core import (
    CardOp,
    Language,
    ProbabilityVector,
    QueryKind,
    QueryResult,
    State,
    Theory,
    VariableSet,
    card_theory,
    edge_theory,
    three_path_theory,
    load_probs,
    load_theory,
    logit,
    satisfies,
    sigmoid,
    vertex_theory,
)
from .engine import answer, answer_circuit, compile_theory
from .errors import (
    CircuitFormatError,
    CycleError,
    DimensionError,
    InconsistentForcingError,
    IntractableError,
    NesykcError,
    OracleCapError,
    StructureError,
    TheoryError,
    UnsatisfiableError,
)
from .oracle import oracle_models, oracle_query
from .queries import eqe, mpe, pqe, thresh_enum, top_k
from .solve_closure import FlowNetwork, closure_mpe, closure_thresh_enum, max_flow
from .solve_match import match_mpe, match_thresh_enum, max_weight_matching

__version__ = "0.1.0"
