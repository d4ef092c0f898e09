"""Route a (theory, query) pair to the compiler or solver that answers it in polynomial time."""

from __future__ import annotations

import math

from . import queries
from .circuit import Circuit
from .compile_card import compile_card
from .compile_hier import compile_te_hier, compile_tree_hier
from .compile_path import compile_aspath
from .core import Language, ProbabilityVector, QueryKind, QueryResult, Theory
from .errors import IntractableError, UnsatisfiableError
from .solve_closure import closure_mpe, closure_ranked
from .solve_match import match_mpe, match_ranked


def _card(t, trim):
    return compile_card(t, trim=trim)


def _path(t, trim):
    return compile_aspath(t, trim=trim)


COMPILERS = {
    Language.CARD: _card,
    Language.ASPATH: _path,
    Language.TREE_HIER: lambda t, trim: compile_tree_hier(t),
    Language.TE_HIER: lambda t, trim: compile_te_hier(t),
}

REFUSALS = {
    Language.HIER: "probability and entropy of DAG hierarchies are #P-hard; only mpe, top-k and thresh are supported",
    Language.MATCH: "counting matchings is #P-hard and matchings have no DNNF compilation; only mpe, top-k and thresh are supported",
    Language.HEX: "hierarchies with exclusions are intractable for every query; use the 2-Horn CNF export or the oracle",
    Language.SPATH: "simple paths in cyclic graphs are intractable for every query; use the oracle",
}


def compile_theory(t: Theory, trim: bool = True) -> Circuit:
    try:
        compiler = COMPILERS[t.language]
    except KeyError:
        raise IntractableError(f"{t.language.value} theories cannot be compiled to d-DNNF here") from None
    return compiler(t, trim)


def _enumeration(kind: QueryKind, scored) -> QueryResult:
    return QueryResult(
        kind,
        states=tuple(s for _, s in scored),
        probabilities=tuple(math.exp(lp) for lp, _ in scored),
    )


def answer_circuit(c: Circuit, p: ProbabilityVector, query, param=None) -> QueryResult:
    kind = QueryKind(query)
    if kind is QueryKind.PQE:
        return QueryResult(kind, value=queries.pqe(c, p))
    if kind is QueryKind.EQE:
        return QueryResult(kind, value=queries.eqe(c.smoothed, p))
    if kind is QueryKind.MPE:
        state, prob = queries.mpe(c, p)
        return QueryResult(kind, value=prob, state=state)
    if kind is QueryKind.TOP_K:
        return _enumeration(kind, queries.top_k_scored(c, p, int(param)))
    return _enumeration(kind, queries.thresh_enum_scored(c, p, float(param)))


def answer(t: Theory, p: ProbabilityVector, query, param=None, trim: bool = True) -> QueryResult:
    """Answer ``query`` on ``t``; ``param`` is k for top-k and the threshold for thresh.

    Raises :class:`IntractableError` when the language has no polynomial route
    for the query.
    """
    kind = QueryKind(query)
    lang = t.language
    if lang in COMPILERS:
        return answer_circuit(compile_theory(t, trim), p, kind, param)
    if lang in (Language.HIER, Language.MATCH) and kind in (QueryKind.MPE, QueryKind.TOP_K, QueryKind.THRESH):
        if kind is QueryKind.MPE:
            state, prob = (closure_mpe if lang is Language.HIER else match_mpe)(t, p)
            return QueryResult(kind, value=prob, state=state)
        ranked = closure_ranked if lang is Language.HIER else match_ranked
        if kind is QueryKind.TOP_K:
            return _enumeration(kind, ranked(t, p, k=int(param)))
        return _enumeration(kind, ranked(t, p, threshold=float(param)))
    raise IntractableError(f"{kind.value} on {lang.value}: {REFUSALS[lang]}")


__all__ = ["answer", "answer_circuit", "compile_theory", "COMPILERS", "UnsatisfiableError"]
