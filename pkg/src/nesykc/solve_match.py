"""Most probable matching through maximum-weight matching on logits.

Edges with a non-positive logit can only lower the probability, so they are
dropped and the blossom algorithm maximizes the remaining logit sum. Weights
are turned into integers so the matching routine runs in exact arithmetic:
each logit is rounded to a multiple of ``2**-40`` and a bonus smaller than one
rounding unit makes lower-indexed edges win exact ties.
"""

from __future__ import annotations

import math

import networkx as nx

from .core import Language, ProbabilityVector, State, Theory
from .errors import InconsistentForcingError, TheoryError
from .ranking import enumerate_ranked

SCALE = 2.0**40


def _integer_weights(weights) -> list[int]:
    """Rounded weights shifted so that ties prefer low indices; non-positive weights map to <= 0."""
    k = len(weights)
    out = []
    for i, w in enumerate(weights):
        r = round(float(w) * SCALE)
        out.append(r * (1 << (k + 1)) + (1 << (k - 1 - i)) if r > 0 else 0)
    return out


def _best_matching(edges, int_weights, allowed) -> set[int]:
    g = nx.Graph()
    for i in allowed:
        if int_weights[i] > 0:
            u, v = edges[i]
            g.add_edge(u, v, weight=int_weights[i], index=i)
    matched = nx.max_weight_matching(g, maxcardinality=False, weight="weight")
    return {g.edges[u, v]["index"] for u, v in matched}


def max_weight_matching(edges, weights) -> frozenset:
    """Edge indices of a matching with maximum total weight (exact up to ``2**-40``)."""
    if len(edges) != len(weights):
        raise ValueError("one weight per edge")
    iw = _integer_weights(weights)
    return frozenset(_best_matching(list(edges), iw, range(len(edges))))


def _check(t: Theory):
    if t.language is not Language.MATCH:
        raise TheoryError(f"matching solving needs a match theory, got {t.language.value}")


def _match_solve(t: Theory, p: ProbabilityVector, iw, forced: dict[int, int]):
    edges = [None] * t.k
    for (u, v), i in zip(t.payload.edges, t.payload.labels):
        edges[i] = (u, v)
    taken = set()
    for i, val in forced.items():
        if val:
            u, v = edges[i]
            if u in taken or v in taken:
                return None
            taken.update((u, v))
    allowed = [
        i for i in range(t.k)
        if i not in forced and edges[i][0] not in taken and edges[i][1] not in taken
    ]
    chosen = _best_matching(edges, iw, allowed) | {i for i, val in forced.items() if val}
    used = set()
    for i in chosen:
        u, v = edges[i]
        if u in used or v in used:
            raise AssertionError("solver returned edges sharing a vertex")
        used.update((u, v))
    state = State(tuple(int(i in chosen) for i in range(t.k)))
    return state.bits, p.log_prob(state)


def _normalize_forced(t: Theory, forced) -> dict[int, int]:
    return {(k if isinstance(k, int) else t.vars.index(k)): int(bool(v)) for k, v in (forced or {}).items()}


def match_mpe(t: Theory, p: ProbabilityVector, forced=None) -> tuple[State, float]:
    """Most probable matching containing the forced-on and avoiding the forced-off edges.

    Exact ties go to the matching that includes the lowest-indexed edge.
    """
    _check(t)
    found = _match_solve(t, p, _integer_weights(p.logits), _normalize_forced(t, forced))
    if found is None:
        raise InconsistentForcingError("forced edges share a vertex")
    bits, logp = found
    return State(bits), math.exp(logp)


def match_ranked(t: Theory, p: ProbabilityVector, k: int | None = None, threshold: float | None = None):
    _check(t)
    iw = _integer_weights(p.logits)
    return enumerate_ranked(lambda fixed: _match_solve(t, p, iw, fixed), t.k, k=k, threshold=threshold)


def match_thresh_enum(t: Theory, p: ProbabilityVector, threshold: float) -> list[State]:
    return [s for _, s in match_ranked(t, p, threshold=threshold)]


def match_top_k(t: Theory, p: ProbabilityVector, k: int) -> list[State]:
    return [s for _, s in match_ranked(t, p, k=k)]
